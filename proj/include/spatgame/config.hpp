#pragma once

// JSON run configuration (schema "spatgame.run.v1"). Unknown keys are errors.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spatgame/dynamics.hpp"
#include "spatgame/errors.hpp"
#include "spatgame/model.hpp"
#include "spatgame/rng.hpp"
#include "spatgame/strategy_space.hpp"

namespace spatgame {

using json = nlohmann::json;

inline constexpr const char* run_schema = "spatgame.run.v1";
inline constexpr std::size_t default_max_strategies = 64;

/// Purposes for deriving independent streams from the top-level seed.
enum class SeedPurpose : std::uint64_t { sampler = 0, dynamics = 1, experiment = 2 };

inline std::uint64_t derive_seed(std::uint64_t seed, SeedPurpose purpose, std::uint64_t index = 0) {
    return rng::stream_seed(rng::stream_seed(seed, static_cast<std::uint64_t>(purpose)), index);
}

namespace cfg {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

inline const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return j.at(key);
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

inline std::vector<double> vector(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(number(v, where));
    return out;
}

inline lp::Matrix matrix(const json& j, std::size_t rows, std::size_t cols, const std::string& where) {
    if (!j.is_array() || j.size() != rows) {
        throw ConfigError(where + ": expected " + std::to_string(rows) + " rows");
    }
    lp::Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = vector(j[r], where);
        if (row.size() != cols) throw ConfigError(where + ": expected " + std::to_string(cols) + " columns");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
}

} // namespace cfg

inline StrategySpace parse_strategy_space(const json& j, std::size_t max_strategies = default_max_strategies) {
    const std::string where = "strategy_space";
    cfg::check_keys(j, {"labels", "distances", "points"}, where);
    const json& lj = cfg::require(j, "labels", where);
    if (!lj.is_array()) throw ConfigError(where + ".labels: expected an array of strings");
    std::vector<std::string> labels;
    for (const auto& l : lj) {
        if (!l.is_string()) throw ConfigError(where + ".labels: expected strings");
        labels.push_back(l.get<std::string>());
    }
    if (labels.size() > max_strategies) {
        throw ConfigError(where + ": " + std::to_string(labels.size()) + " strategies exceed the cap of " +
                          std::to_string(max_strategies));
    }
    const bool has_d = j.contains("distances");
    const bool has_p = j.contains("points");
    if (has_d == has_p) throw ConfigError(where + ": give exactly one of 'distances' or 'points'");
    if (has_d) return StrategySpace(labels, cfg::matrix(j.at("distances"), labels.size(), labels.size(), where + ".distances"));
    std::vector<std::vector<double>> pts;
    for (const auto& p : j.at("points")) pts.push_back(cfg::vector(p, where + ".points"));
    if (pts.size() != labels.size()) throw ConfigError(where + ".points: need one point per label");
    return StrategySpace::from_points(labels, pts);
}

inline SpatialKernel parse_kernel(const json& payoff) {
    SpatialKernel k;
    const std::string kind = payoff.value("kernel", std::string("constant"));
    if (kind == "constant") {
        k.kind = KernelKind::constant;
        k.param = payoff.contains("scale") ? cfg::number(payoff.at("scale"), "payoff.scale") : 1.0;
        if (payoff.contains("bandwidth") || payoff.contains("radius")) {
            throw ConfigError("payoff: constant kernel takes 'scale' only");
        }
    } else if (kind == "gaussian") {
        k.kind = KernelKind::gaussian;
        k.param = cfg::number(cfg::require(payoff, "bandwidth", "payoff"), "payoff.bandwidth");
        if (payoff.contains("scale") || payoff.contains("radius")) throw ConfigError("payoff: gaussian kernel takes 'bandwidth' only");
    } else if (kind == "bump") {
        k.kind = KernelKind::bump;
        k.param = cfg::number(cfg::require(payoff, "radius", "payoff"), "payoff.radius");
        if (payoff.contains("scale") || payoff.contains("bandwidth")) throw ConfigError("payoff: bump kernel takes 'radius' only");
    } else {
        throw ConfigError("payoff.kernel: unknown kernel '" + kind + "' (constant, gaussian, bump)");
    }
    k.validate();
    return k;
}

inline GameModel parse_model(const json& j) {
    cfg::check_keys(j, {"dim", "strategy_space", "payoff", "velocity", "position_bound", "lipschitz_overrides",
                        "max_strategies"},
                    "model");
    const json& dj = cfg::require(j, "dim", "model");
    if (!dj.is_number_integer() || dj.get<long long>() <= 0) throw ConfigError("model.dim: expected a positive integer");
    const auto dim = static_cast<std::size_t>(dj.get<long long>());
    std::size_t max_k = default_max_strategies;
    if (j.contains("max_strategies")) {
        if (!j.at("max_strategies").is_number_integer() || j.at("max_strategies").get<long long>() <= 0) {
            throw ConfigError("model.max_strategies: expected a positive integer");
        }
        max_k = static_cast<std::size_t>(j.at("max_strategies").get<long long>());
    }
    StrategySpace space = parse_strategy_space(cfg::require(j, "strategy_space", "model"), max_k);
    const std::size_t K = space.size();

    const json& pj = cfg::require(j, "payoff", "model");
    cfg::check_keys(pj, {"matrix", "kernel", "bandwidth", "radius", "scale"}, "model.payoff");
    PayoffFamily payoff{cfg::matrix(cfg::require(pj, "matrix", "model.payoff"), K, K, "model.payoff.matrix"),
                        parse_kernel(pj)};

    const json& vj = cfg::require(j, "velocity", "model");
    cfg::check_keys(vj, {"table", "damping"}, "model.velocity");
    VelocityFamily velocity{cfg::matrix(cfg::require(vj, "table", "model.velocity"), K, dim, "model.velocity.table"),
                            vj.contains("damping") ? cfg::number(vj.at("damping"), "model.velocity.damping") : 0.0};

    std::optional<double> bound;
    if (j.contains("position_bound")) bound = cfg::number(j.at("position_bound"), "model.position_bound");

    LipschitzOverrides ov;
    if (j.contains("lipschitz_overrides")) {
        const json& oj = j.at("lipschitz_overrides");
        cfg::check_keys(oj, {"L_e", "L_J"}, "model.lipschitz_overrides");
        if (oj.contains("L_e")) ov.L_e = cfg::number(oj.at("L_e"), "model.lipschitz_overrides.L_e");
        if (oj.contains("L_J")) ov.L_J = cfg::number(oj.at("L_J"), "model.lipschitz_overrides.L_J");
    }
    return GameModel(std::move(space), dim, std::move(payoff), std::move(velocity), bound, ov);
}

inline IntegratorConfig parse_integrator(const json& j) {
    cfg::check_keys(j, {"scheme", "mode", "h", "T", "theta_guard", "safety", "stride"}, "integrator");
    IntegratorConfig c;
    const std::string scheme = j.value("scheme", std::string("euler"));
    if (scheme == "euler") c.scheme = Scheme::euler;
    else if (scheme == "heun") c.scheme = Scheme::heun;
    else throw ConfigError("integrator.scheme: expected 'euler' or 'heun'");
    const std::string mode = j.value("mode", std::string("deterministic"));
    if (mode == "deterministic") c.mode = Mode::deterministic;
    else if (mode == "belief_update") c.mode = Mode::belief_update;
    else throw ConfigError("integrator.mode: expected 'deterministic' or 'belief_update'");
    c.h = cfg::number(cfg::require(j, "h", "integrator"), "integrator.h");
    c.T = cfg::number(cfg::require(j, "T", "integrator"), "integrator.T");
    if (j.contains("theta_guard")) {
        if (!j.at("theta_guard").is_boolean()) throw ConfigError("integrator.theta_guard: expected a boolean");
        c.theta_guard = j.at("theta_guard").get<bool>();
    }
    if (j.contains("safety")) c.safety = cfg::number(j.at("safety"), "integrator.safety");
    if (j.contains("stride")) {
        if (!j.at("stride").is_number_integer() || j.at("stride").get<long long>() < 0) {
            throw ConfigError("integrator.stride: expected a nonnegative integer");
        }
        c.stride = static_cast<std::size_t>(j.at("stride").get<long long>());
    }
    return c;
}

enum class PositionKind { gaussian, uniform_box, grid };
enum class StrategyKind { dirichlet, uniform_simplex, vertex_mixture };

/// Product sampler: positions and strategies drawn independently per agent.
struct SamplerSpec {
    std::size_t n = 1;
    PositionKind position = PositionKind::gaussian;
    std::vector<double> mean;   // gaussian
    double std_dev = 1.0;       // gaussian
    std::vector<double> lo, hi; // uniform_box, grid
    std::size_t per_axis = 2;   // grid
    StrategyKind strategy = StrategyKind::uniform_simplex;
    std::vector<double> alpha;   // dirichlet
    std::vector<double> weights; // vertex_mixture

    void validate(std::size_t d, std::size_t K) const {
        if (n == 0) throw ConfigError("sampler.n must be positive");
        switch (position) {
        case PositionKind::gaussian:
            if (mean.size() != d) throw ConfigError("sampler.position.mean must have length d");
            if (!(std_dev >= 0.0)) throw ConfigError("sampler.position.std must be nonnegative");
            break;
        case PositionKind::uniform_box:
        case PositionKind::grid:
            if (lo.size() != d || hi.size() != d) throw ConfigError("sampler.position bounds must have length d");
            for (std::size_t c = 0; c < d; ++c)
                if (!(lo[c] <= hi[c])) throw ConfigError("sampler.position: box bounds must be ordered (lo <= hi)");
            if (position == PositionKind::grid && per_axis == 0) throw ConfigError("sampler.position.per_axis must be positive");
            break;
        }
        switch (strategy) {
        case StrategyKind::dirichlet:
            if (alpha.size() != K) throw ConfigError("sampler.strategy.alpha must have length K");
            for (double a : alpha)
                if (!(a > 0.0)) throw ConfigError("sampler.strategy.alpha entries must be positive");
            break;
        case StrategyKind::uniform_simplex: break;
        case StrategyKind::vertex_mixture: {
            if (weights.size() != K) throw ConfigError("sampler.strategy.weights must have length K");
            double s = 0.0;
            for (double w : weights) {
                if (!(w >= 0.0)) throw ConfigError("sampler.strategy.weights must be nonnegative");
                s += w;
            }
            if (!(s > 0.0)) throw ConfigError("sampler.strategy.weights must not all be zero");
            break;
        }
        }
    }
};

/// Draws the agents one at a time from a single stream, so the first m agents
/// of an n-sample equal an m-sample with the same seed.
inline Ensemble sample_ensemble(const SamplerSpec& spec, std::size_t d, std::size_t K, std::uint64_t seed) {
    spec.validate(d, K);
    rng::Engine g(seed);
    std::vector<AgentState> agents;
    agents.reserve(spec.n);
    const std::vector<double> ones(K, 1.0);
    for (std::size_t a = 0; a < spec.n; ++a) {
        AgentState y;
        y.x.resize(d);
        switch (spec.position) {
        case PositionKind::gaussian:
            for (std::size_t c = 0; c < d; ++c) y.x[c] = spec.mean[c] + spec.std_dev * rng::normal(g);
            break;
        case PositionKind::uniform_box:
            for (std::size_t c = 0; c < d; ++c) y.x[c] = rng::uniform(g, spec.lo[c], spec.hi[c]);
            break;
        case PositionKind::grid: {
            std::size_t idx = a;
            for (std::size_t c = 0; c < d; ++c) {
                const std::size_t i = idx % spec.per_axis;
                idx /= spec.per_axis;
                const double frac = spec.per_axis == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(spec.per_axis - 1);
                y.x[c] = spec.lo[c] + frac * (spec.hi[c] - spec.lo[c]);
            }
            break;
        }
        }
        switch (spec.strategy) {
        case StrategyKind::dirichlet: y.sigma = MixedStrategy::from_step(rng::dirichlet(g, spec.alpha)); break;
        case StrategyKind::uniform_simplex: y.sigma = MixedStrategy::from_step(rng::dirichlet(g, ones)); break;
        case StrategyKind::vertex_mixture: y.sigma = MixedStrategy::dirac(K, rng::categorical(g, spec.weights)); break;
        }
        agents.push_back(std::move(y));
    }
    return Ensemble::uniform(std::move(agents));
}

inline SamplerSpec parse_sampler(const json& j) {
    cfg::check_keys(j, {"n", "position", "strategy"}, "initial.sampler");
    SamplerSpec s;
    const json& nj = cfg::require(j, "n", "initial.sampler");
    if (!nj.is_number_integer() || nj.get<long long>() <= 0) throw ConfigError("initial.sampler.n: expected a positive integer");
    s.n = static_cast<std::size_t>(nj.get<long long>());

    const json& pj = cfg::require(j, "position", "initial.sampler");
    const std::string pk = cfg::require(pj, "kind", "initial.sampler.position").get<std::string>();
    if (pk == "gaussian") {
        cfg::check_keys(pj, {"kind", "mean", "std"}, "initial.sampler.position");
        s.position = PositionKind::gaussian;
        s.mean = cfg::vector(cfg::require(pj, "mean", "initial.sampler.position"), "initial.sampler.position.mean");
        s.std_dev = cfg::number(cfg::require(pj, "std", "initial.sampler.position"), "initial.sampler.position.std");
    } else if (pk == "uniform_box" || pk == "grid") {
        if (pk == "grid") cfg::check_keys(pj, {"kind", "lo", "hi", "per_axis"}, "initial.sampler.position");
        else cfg::check_keys(pj, {"kind", "lo", "hi"}, "initial.sampler.position");
        s.position = pk == "grid" ? PositionKind::grid : PositionKind::uniform_box;
        s.lo = cfg::vector(cfg::require(pj, "lo", "initial.sampler.position"), "initial.sampler.position.lo");
        s.hi = cfg::vector(cfg::require(pj, "hi", "initial.sampler.position"), "initial.sampler.position.hi");
        if (pk == "grid") {
            const json& q = cfg::require(pj, "per_axis", "initial.sampler.position");
            if (!q.is_number_integer() || q.get<long long>() <= 0) throw ConfigError("initial.sampler.position.per_axis: expected a positive integer");
            s.per_axis = static_cast<std::size_t>(q.get<long long>());
        }
    } else {
        throw ConfigError("initial.sampler.position.kind: expected gaussian, uniform_box or grid");
    }

    const json& sj = cfg::require(j, "strategy", "initial.sampler");
    const std::string sk = cfg::require(sj, "kind", "initial.sampler.strategy").get<std::string>();
    if (sk == "dirichlet") {
        cfg::check_keys(sj, {"kind", "alpha"}, "initial.sampler.strategy");
        s.strategy = StrategyKind::dirichlet;
        const json& aj = cfg::require(sj, "alpha", "initial.sampler.strategy");
        if (aj.is_number()) s.alpha = {aj.get<double>()}; // broadcast later
        else s.alpha = cfg::vector(aj, "initial.sampler.strategy.alpha");
    } else if (sk == "uniform_simplex") {
        cfg::check_keys(sj, {"kind"}, "initial.sampler.strategy");
        s.strategy = StrategyKind::uniform_simplex;
    } else if (sk == "vertex_mixture") {
        cfg::check_keys(sj, {"kind", "weights"}, "initial.sampler.strategy");
        s.strategy = StrategyKind::vertex_mixture;
        s.weights = cfg::vector(cfg::require(sj, "weights", "initial.sampler.strategy"), "initial.sampler.strategy.weights");
    } else {
        throw ConfigError("initial.sampler.strategy.kind: expected dirichlet, uniform_simplex or vertex_mixture");
    }
    return s;
}

inline Ensemble parse_agents(const json& j, std::size_t d, std::size_t K) {
    if (!j.is_array() || j.empty()) throw ConfigError("initial.agents: expected a nonempty array");
    std::vector<AgentState> agents;
    std::vector<double> masses;
    bool any_mass = false, all_mass = true;
    for (const auto& a : j) {
        cfg::check_keys(a, {"x", "sigma", "mass"}, "initial.agents[]");
        AgentState y;
        y.x = cfg::vector(cfg::require(a, "x", "initial.agents[]"), "initial.agents[].x");
        if (y.x.size() != d) throw ConfigError("initial.agents[].x must have length d");
        auto s = cfg::vector(cfg::require(a, "sigma", "initial.agents[]"), "initial.agents[].sigma");
        if (s.size() != K) throw ConfigError("initial.agents[].sigma must have length K");
        y.sigma = MixedStrategy(std::move(s));
        agents.push_back(std::move(y));
        if (a.contains("mass")) {
            any_mass = true;
            masses.push_back(cfg::number(a.at("mass"), "initial.agents[].mass"));
        } else {
            all_mass = false;
        }
    }
    if (any_mass && !all_mass) throw ConfigError("initial.agents: give a mass for every agent or for none");
    if (!any_mass) return Ensemble::uniform(std::move(agents));
    return Ensemble(std::move(agents), std::move(masses));
}

struct OutputSpec {
    std::string dir = "out";
    std::string prefix = "trajectory";
};

struct RunConfig {
    GameModel model;
    IntegratorConfig integrator;
    std::optional<Ensemble> explicit_agents;
    std::optional<SamplerSpec> sampler;
    OutputSpec output;
    std::uint64_t seed = 0;
    json experiment = json::object();
    json source; // the parsed document, with the effective seed

    /// Initial ensemble: the explicit agent list or a draw from the sampler.
    Ensemble initial_ensemble() const {
        if (explicit_agents) return *explicit_agents;
        return sample_ensemble(*sampler, model.dim(), model.strategies(), derive_seed(seed, SeedPurpose::sampler));
    }

    /// The integrator config with its stochastic stream bound to the run seed.
    IntegratorConfig integrator_for_run(unsigned threads) const {
        IntegratorConfig c = integrator;
        c.rng_seed = derive_seed(seed, SeedPurpose::dynamics);
        c.threads = threads;
        return c;
    }
};

inline RunConfig parse_run_config(const json& j, std::optional<std::uint64_t> seed_override = std::nullopt) {
    cfg::check_keys(j, {"schema", "model", "integrator", "initial", "output", "seed", "experiment"}, "config");
    const json& sj = cfg::require(j, "schema", "config");
    if (!sj.is_string() || sj.get<std::string>() != run_schema) {
        throw ConfigError(std::string("config.schema: expected \"") + run_schema + "\"");
    }
    GameModel model = parse_model(cfg::require(j, "model", "config"));
    IntegratorConfig integ = parse_integrator(cfg::require(j, "integrator", "config"));

    std::uint64_t seed = 0;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0)) {
            throw ConfigError("config.seed: expected a nonnegative integer");
        }
        seed = j.at("seed").get<std::uint64_t>();
    }
    if (seed_override) seed = *seed_override;

    const json& ij = cfg::require(j, "initial", "config");
    cfg::check_keys(ij, {"agents", "sampler"}, "initial");
    std::optional<Ensemble> agents;
    std::optional<SamplerSpec> sampler;
    if (ij.contains("agents") == ij.contains("sampler")) throw ConfigError("initial: give exactly one of 'agents' or 'sampler'");
    if (ij.contains("agents")) {
        agents = parse_agents(ij.at("agents"), model.dim(), model.strategies());
    } else {
        sampler = parse_sampler(ij.at("sampler"));
        if (sampler->strategy == StrategyKind::dirichlet && sampler->alpha.size() == 1 && model.strategies() != 1) {
            sampler->alpha.assign(model.strategies(), sampler->alpha[0]);
        }
        sampler->validate(model.dim(), model.strategies());
    }

    OutputSpec out;
    if (j.contains("output")) {
        const json& oj = j.at("output");
        cfg::check_keys(oj, {"dir", "prefix"}, "output");
        if (oj.contains("dir")) out.dir = oj.at("dir").get<std::string>();
        if (oj.contains("prefix")) out.prefix = oj.at("prefix").get<std::string>();
    }

    json experiment = json::object();
    if (j.contains("experiment")) {
        experiment = j.at("experiment");
        if (!experiment.is_object()) throw ConfigError("config.experiment: expected an object");
    }

    json source = j;
    source["seed"] = seed;
    RunConfig rc{std::move(model), integ, std::move(agents), std::move(sampler), out, seed, experiment, source};
    validate(rc.integrator, rc.model);
    return rc;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

inline RunConfig load_run_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
    try {
        return parse_run_config(read_json_file(path), seed_override);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

// --- serialization of model pieces (used in metadata echoes) ---

inline json to_json(const lp::Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

inline json to_json(const StrategySpace& s) {
    return json{{"labels", s.labels()}, {"distances", to_json(s.dist())}};
}

inline json to_json(const LipschitzLedger& l) {
    json j{{"L_e", l.L_e}, {"L_J", l.L_J}, {"diam_U", l.diam}, {"L_fx", l.L_fx}, {"L_fsigma", l.L_fsigma}, {"L", l.L}};
    if (std::isfinite(l.theta_max)) j["theta_max"] = l.theta_max;
    else j["theta_max"] = "inf";
    return j;
}

inline json to_json(const GameModel& m) {
    json payoff{{"matrix", to_json(m.payoff_family().matrix)}, {"kernel", to_string(m.payoff_family().kernel.kind)}};
    switch (m.payoff_family().kernel.kind) {
    case KernelKind::constant: payoff["scale"] = m.payoff_family().kernel.param; break;
    case KernelKind::gaussian: payoff["bandwidth"] = m.payoff_family().kernel.param; break;
    case KernelKind::bump: payoff["radius"] = m.payoff_family().kernel.param; break;
    }
    json j{{"dim", m.dim()},
           {"strategy_space", to_json(m.space())},
           {"payoff", payoff},
           {"velocity", {{"table", to_json(m.velocity_family().table)}, {"damping", m.velocity_family().damping}}}};
    if (m.position_bound()) j["position_bound"] = *m.position_bound();
    if (m.overrides().L_e || m.overrides().L_J) {
        json ov = json::object();
        if (m.overrides().L_e) ov["L_e"] = *m.overrides().L_e;
        if (m.overrides().L_J) ov["L_J"] = *m.overrides().L_J;
        j["lipschitz_overrides"] = ov;
    }
    return j;
}

inline json to_json(const IntegratorConfig& c) {
    return json{{"scheme", to_string(c.scheme)}, {"mode", to_string(c.mode)}, {"h", c.h},
                {"T", c.T},         {"theta_guard", c.theta_guard},   {"safety", c.safety},
                {"stride", c.stride}};
}

inline json to_json(const Ensemble& e) {
    json agents = json::array();
    for (std::size_t a = 0; a < e.size(); ++a) {
        agents.push_back(json{{"x", e.agent(a).x},
                              {"sigma", std::vector<double>(e.agent(a).sigma.weights().begin(), e.agent(a).sigma.weights().end())},
                              {"mass", e.mass(a)}});
    }
    return agents;
}

} // namespace spatgame
