#pragma once

// File formats: trajectory CSV, run metadata JSON, coupling CSV, experiment
// reports. Floats are written with 17 significant digits so they parse back
// bit-exactly.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "spatgame/config.hpp"
#include "spatgame/dynamics.hpp"
#include "spatgame/errors.hpp"
#include "spatgame/transport.hpp"
#include "spatgame/verify.hpp"

namespace spatgame::io {

using json = nlohmann::json;

// Shortest text that parses back to the same double.
inline void append_double(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

inline std::string format_double(double v) {
    std::string s;
    append_double(s, v);
    return s;
}

inline double parse_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(where + ": '" + std::string(s) + "' is not a number");
    }
    return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string trajectory_header(std::size_t d, std::size_t K) {
    std::string h = "time,agent_id,mass";
    for (std::size_t c = 1; c <= d; ++c) h += ",x_" + std::to_string(c);
    for (std::size_t k = 1; k <= K; ++k) h += ",sigma_" + std::to_string(k);
    return h;
}

/// One row per agent per stored time, header first.
inline std::string trajectory_csv(const Trajectory& traj) {
    if (traj.states.empty()) throw ConfigError("cannot write an empty trajectory");
    const std::size_t d = traj.states[0].dim(), K = traj.states[0].strategies();
    std::string out = trajectory_header(d, K);
    out += '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Ensemble& e = traj.states[k];
        for (std::size_t a = 0; a < e.size(); ++a) {
            append_double(out, traj.times[k]);
            out += ',';
            out += std::to_string(a);
            out += ',';
            append_double(out, e.mass(a));
            for (double x : e.agent(a).x) {
                out += ',';
                append_double(out, x);
            }
            for (double s : e.agent(a).sigma.weights()) {
                out += ',';
                append_double(out, s);
            }
            out += '\n';
        }
    }
    return out;
}

/// Parses a trajectory CSV; rows of one time must be contiguous with agent ids
/// 0..N-1 in order.
inline Trajectory parse_trajectory_csv(std::string_view text, const std::string& source = "trajectory") {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        auto line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        start = pos + 1;
    }
    if (lines.empty()) throw ConfigError(source + ": empty file");
    const auto header = split_commas(lines[0]);
    if (header.size() < 5 || header[0] != "time" || header[1] != "agent_id" || header[2] != "mass") {
        throw ConfigError(source + ": header must start with time,agent_id,mass");
    }
    std::size_t d = 0, K = 0;
    for (std::size_t c = 3; c < header.size(); ++c) {
        if (header[c] == "x_" + std::to_string(d + 1) && K == 0) ++d;
        else if (header[c] == "sigma_" + std::to_string(K + 1)) ++K;
        else throw ConfigError(source + ": unexpected column '" + std::string(header[c]) + "'");
    }
    if (d == 0 || K == 0) throw ConfigError(source + ": need at least one x_ and one sigma_ column");

    Trajectory traj;
    std::vector<AgentState> agents;
    std::vector<double> masses;
    double current_time = 0.0;
    auto flush = [&] {
        if (agents.empty()) return;
        traj.push(current_time, Ensemble(std::move(agents), std::move(masses)));
        agents.clear();
        masses.clear();
    };
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::string where = source + ":" + std::to_string(r + 1);
        const auto f = split_commas(lines[r]);
        if (f.size() != header.size()) throw ConfigError(where + ": wrong number of fields");
        const double t = parse_double(f[0], where);
        std::size_t id = 0;
        const auto idr = std::from_chars(f[1].data(), f[1].data() + f[1].size(), id);
        if (idr.ec != std::errc() || idr.ptr != f[1].data() + f[1].size()) throw ConfigError(where + ": bad agent_id");
        if (!agents.empty() && t != current_time) flush();
        if (agents.empty()) current_time = t;
        if (id != agents.size()) throw ConfigError(where + ": agent ids must run 0..N-1 within each time");
        masses.push_back(parse_double(f[2], where));
        AgentState y;
        y.x.resize(d);
        for (std::size_t c = 0; c < d; ++c) y.x[c] = parse_double(f[3 + c], where);
        std::vector<double> s(K);
        for (std::size_t k = 0; k < K; ++k) s[k] = parse_double(f[3 + d + k], where);
        y.sigma = MixedStrategy(std::move(s));
        agents.push_back(std::move(y));
    }
    flush();
    if (traj.size() == 0) throw ConfigError(source + ": no data rows");
    for (std::size_t k = 1; k < traj.size(); ++k) {
        if (traj.states[k].size() != traj.states[0].size()) throw ConfigError(source + ": agent count changes over time");
        if (!(traj.times[k] > traj.times[k - 1])) throw ConfigError(source + ": times must increase");
    }
    return traj;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

inline Trajectory load_trajectory(const std::string& path) { return parse_trajectory_csv(read_file(path), path); }

/// Index of the stored time equal to t within a relative 1e-12.
inline std::size_t find_time(const Trajectory& traj, double t) {
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (std::abs(traj.times[k] - t) <= 1e-12 * (1.0 + std::abs(t))) return k;
    }
    throw GridMismatch("time " + format_double(t) + " is not a stored time");
}

inline std::string coupling_csv(const Coupling& c) {
    std::string out = "row,col,mass\n";
    for (std::size_t i = 0; i < c.rows(); ++i) {
        for (std::size_t j = 0; j < c.cols(); ++j) {
            if (c.plan(i, j) == 0.0) continue;
            out += std::to_string(i) + ',' + std::to_string(j) + ',';
            append_double(out, c.plan(i, j));
            out += '\n';
        }
    }
    return out;
}

inline json diagnostics_json(const StepDiagnostics& d) {
    return json{{"steps", d.steps},
                {"clamp_events", d.clamp_events},
                {"max_tv_speed_ratio", d.max_tv_speed_ratio},
                {"max_position_speed_ratio", d.max_position_speed_ratio},
                {"max_mass_sum_error", d.max_mass_sum_error}};
}

struct SimulationOutput {
    Trajectory trajectory;
    std::string csv;
    json metadata;
};

/// Runs a configured simulation. The metadata holds only deterministic fields
/// (no wall time, no thread count) so equal inputs give equal bytes.
inline SimulationOutput run_simulation(const RunConfig& rc, unsigned threads) {
    const IntegratorConfig cfg = rc.integrator_for_run(threads);
    SimulationOutput out;
    out.trajectory = integrate(rc.initial_ensemble(), cfg, rc.model);
    out.csv = trajectory_csv(out.trajectory);
    json integ = to_json(cfg);
    integ["rng_seed"] = cfg.rng_seed;
    out.metadata = json{{"schema", "spatgame.meta.v1"},
                        {"config", rc.source},
                        {"model", to_json(rc.model)},
                        {"integrator", integ},
                        {"ledger", to_json(rc.model.ledger())},
                        {"seed", rc.seed},
                        {"derived_seeds",
                         {{"sampler", derive_seed(rc.seed, SeedPurpose::sampler)},
                          {"dynamics", derive_seed(rc.seed, SeedPurpose::dynamics)}}},
                        {"agents", out.trajectory.states[0].size()},
                        {"stored_times", out.trajectory.size()},
                        {"diagnostics", diagnostics_json(out.trajectory.diagnostics)}};
    return out;
}

inline std::string report_summary_csv(const verify::ExperimentReport& r) {
    std::string out = "experiment,quantity,value\n";
    for (const auto& q : r.quantities) {
        out += r.name + ',' + q.name + ',';
        append_double(out, q.value);
        out += '\n';
    }
    out += r.name + ",pass," + (r.pass ? "1" : "0") + '\n';
    return out;
}

} // namespace spatgame::io
