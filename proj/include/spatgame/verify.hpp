#pragma once

// Experiment harness: each experiment integrates one or more runs, measures
// the quantities behind an analytic bound and reports pass/fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spatgame/config.hpp"
#include "spatgame/dynamics.hpp"
#include "spatgame/fixtures.hpp"
#include "spatgame/model.hpp"
#include "spatgame/parallel.hpp"
#include "spatgame/rng.hpp"
#include "spatgame/transport.hpp"

namespace spatgame::verify {

using json = nlohmann::json;

struct Quantity {
    std::string name;
    double value = 0.0;
};

/// pass is true iff no named check failed.
struct ExperimentReport {
    std::string name;
    std::vector<Quantity> quantities;
    std::vector<std::string> failed_checks;
    bool pass = true;
    double runtime_s = 0.0;
    json config_echo = json::object();

    void set(const std::string& key, double value) {
        for (auto& q : quantities) {
            if (q.name == key) {
                q.value = value;
                return;
            }
        }
        quantities.push_back({key, value});
    }

    double get(const std::string& key) const {
        for (const auto& q : quantities)
            if (q.name == key) return q.value;
        throw ConfigError("report '" + name + "' has no quantity '" + key + "'");
    }

    bool has(const std::string& key) const {
        return std::any_of(quantities.begin(), quantities.end(), [&](const Quantity& q) { return q.name == key; });
    }

    void check(const std::string& label, bool ok) {
        if (!ok) {
            failed_checks.push_back(label);
            pass = false;
        }
    }
};

inline json to_json(const ExperimentReport& r) {
    json q = json::object();
    for (const auto& x : r.quantities) {
        if (std::isfinite(x.value)) q[x.name] = x.value;
        else q[x.name] = x.value > 0 ? "inf" : (x.value < 0 ? "-inf" : "nan");
    }
    return json{{"schema", "spatgame.report.v1"}, {"name", r.name},           {"pass", r.pass},
                {"failed_checks", r.failed_checks}, {"quantities", q},        {"runtime_s", r.runtime_s},
                {"config_echo", r.config_echo}};
}

namespace detail {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline json provenance(const GameModel& model, const IntegratorConfig& cfg) {
    json j{{"model", to_json(model)}, {"integrator", to_json(cfg)}, {"ledger", to_json(model.ledger())}};
    j["integrator"]["rng_seed"] = cfg.rng_seed;
    return j;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<double> random_unit(rng::Engine& g, std::size_t d) {
    std::vector<double> u(d);
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (double& c : u) {
            c = rng::normal(g);
            n2 += c * c;
        }
    } while (n2 == 0.0);
    for (double& c : u) c /= std::sqrt(n2);
    return u;
}

} // namespace detail

/// Absolute floor below which a measured distance counts as zero.
inline constexpr double zero_floor = 1e-12;

/// Discretization slack (1 + 20 L h) applied to continuous-time bounds.
inline double tol_disc(const GameModel& model, double h) { return 20.0 * model.ledger().L * h; }

/// Shifts every position by `radius` in an independent random direction.
inline Ensemble perturb_positions(const Ensemble& e, double radius, std::uint64_t seed) {
    rng::Engine g(seed);
    std::vector<AgentState> agents = e.agents();
    for (auto& y : agents) {
        const auto u = detail::random_unit(g, y.x.size());
        for (std::size_t c = 0; c < y.x.size(); ++c) y.x[c] += radius * u[c];
    }
    return Ensemble(std::move(agents), e.masses());
}

/// Checks W1(S1_t, S2_t) <= e^{2Lt} W1(S1_0, S2_0) (1 + tol_disc) at the given
/// times; returns the worst ratio W1_t / (e^{2Lt} W1_0) and whether all held.
struct ChainCheck {
    double worst_ratio = 0.0;
    bool ok = true;
};

inline ChainCheck stability_profile_check(const std::vector<double>& times, const std::vector<double>& w1, double L,
                                          double slack) {
    ChainCheck out;
    const double w0 = w1.empty() ? 0.0 : w1.front();
    for (std::size_t k = 0; k < w1.size(); ++k) {
        const double env = std::exp(2.0 * L * times[k]) * w0;
        if (env > 0.0) out.worst_ratio = std::max(out.worst_ratio, w1[k] / env);
        else if (w1[k] > zero_floor) out.worst_ratio = std::numeric_limits<double>::infinity();
        if (w1[k] > env * (1.0 + slack) + zero_floor) out.ok = false;
    }
    return out;
}

// ---------------------------------------------------------------- stability

inline ExperimentReport stability_experiment(const Ensemble& A, const Ensemble& B, const IntegratorConfig& cfg,
                                             const GameModel& model) {
    detail::Stopwatch sw;
    ExperimentReport r;
    r.name = "stability";
    const Trajectory T1 = integrate(A, cfg, model);
    const Trajectory T2 = integrate(B, cfg, model);
    const auto w1 = w1_profile(T1, T2, model.space(), cfg.threads);
    const double slack = tol_disc(model, cfg.h);
    const auto chk = stability_profile_check(T1.times, w1, model.ledger().L, slack);
    r.set("L", model.ledger().L);
    r.set("h", cfg.h);
    r.set("tol_disc", slack);
    r.set("w1_initial", w1.front());
    r.set("w1_final", w1.back());
    r.set("w1_max", *std::max_element(w1.begin(), w1.end()));
    r.set("worst_ratio", chk.worst_ratio);
    r.set("ratio_bound", 1.0 + slack);
    r.set("stored_times", static_cast<double>(w1.size()));
    r.check("W1_t <= e^{2Lt} W1_0 (1 + tol_disc) at every stored time", chk.ok);
    r.config_echo = detail::provenance(model, cfg);
    r.runtime_s = sw.seconds();
    return r;
}

// ------------------------------------------------------------ N convergence

/// Nested i.i.d. samples: for each seed, Nmax agents are drawn once and the
/// ensemble of size N takes the first N of them with uniform masses.
inline ExperimentReport n_convergence_experiment(const SamplerSpec& base, const std::vector<std::size_t>& n_list,
                                                 const IntegratorConfig& cfg, const GameModel& model,
                                                 const std::vector<std::uint64_t>& seeds, std::size_t snapshots = 10) {
    detail::Stopwatch sw;
    if (n_list.size() < 2) throw ConfigError("converge-n needs at least two sizes");
    for (std::size_t i = 0; i + 1 < n_list.size(); ++i)
        if (!(n_list[i] < n_list[i + 1])) throw ConfigError("converge-n sizes must be increasing");
    if (n_list.front() == 0) throw ConfigError("converge-n sizes must be positive");
    if (seeds.empty()) throw ConfigError("converge-n needs at least one seed");

    const std::size_t n_max = n_list.back();
    const std::size_t steps = step_count(cfg);
    IntegratorConfig run_cfg = cfg;
    run_cfg.threads = 1;
    run_cfg.stride = std::max<std::size_t>(1, steps / std::max<std::size_t>(1, snapshots));
    const double L = model.ledger().L;
    const double slack = tol_disc(model, cfg.h);

    struct SeedResult {
        std::vector<double> to_max;      // W1(S^N_T, S^Nmax_T) for N < Nmax
        std::vector<double> chain_ratio; // worst stability ratio per consecutive pair
        bool chain_ok = true;
    };
    std::vector<SeedResult> results(seeds.size());
    parallel_for(seeds.size(), cfg.threads, [&](std::size_t s) {
        SamplerSpec spec = base;
        spec.n = n_max;
        const Ensemble full = sample_ensemble(spec, model.dim(), model.strategies(), seeds[s]);
        std::vector<Trajectory> runs;
        for (std::size_t n : n_list) {
            std::vector<AgentState> head(full.agents().begin(), full.agents().begin() + static_cast<std::ptrdiff_t>(n));
            runs.push_back(integrate(Ensemble::uniform(std::move(head)), run_cfg, model));
        }
        SeedResult& out = results[s];
        for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
            const auto w1 = w1_profile(runs[i], runs[i + 1], model.space());
            const auto chk = stability_profile_check(runs[i].times, w1, L, slack);
            out.chain_ratio.push_back(chk.worst_ratio);
            out.chain_ok = out.chain_ok && chk.ok;
        }
        for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
            out.to_max.push_back(w1_ensembles(runs[i].back(), runs.back().back(), model.space()).value);
        }
    });

    ExperimentReport r;
    r.name = "converge-n";
    r.set("L", L);
    r.set("h", cfg.h);
    r.set("T", cfg.T);
    r.set("tol_disc", slack);
    r.set("seeds", static_cast<double>(seeds.size()));
    std::vector<double> medians;
    for (std::size_t i = 0; i + 1 < n_list.size(); ++i) {
        std::vector<double> col;
        for (const auto& s : results) col.push_back(s.to_max[i]);
        medians.push_back(detail::median(col));
        r.set("median_w1_T_N" + std::to_string(n_list[i]) + "_vs_N" + std::to_string(n_max), medians.back());
    }
    double worst_chain = 0.0;
    bool chain_ok = true;
    for (const auto& s : results) {
        chain_ok = chain_ok && s.chain_ok;
        for (double v : s.chain_ratio) worst_chain = std::max(worst_chain, v);
    }
    r.set("worst_chain_ratio", worst_chain);
    r.set("chain_ratio_bound", 1.0 + slack);
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < medians.size(); ++i) decreasing = decreasing && medians[i + 1] < medians[i];
    const bool degenerate = std::all_of(medians.begin(), medians.end(), [](double m) { return m <= zero_floor; });
    r.set("degenerate", degenerate ? 1.0 : 0.0);
    r.check("median W1 to the largest ensemble strictly decreases in N", decreasing || degenerate);
    r.check("chain stability bound holds for every seed and consecutive pair", chain_ok);
    r.config_echo = detail::provenance(model, cfg);
    r.config_echo["n_list"] = n_list;
    r.config_echo["seeds"] = seeds;
    r.config_echo["snapshots"] = snapshots;
    r.runtime_s = sw.seconds();
    return r;
}

// ------------------------------------------------------------ h convergence

struct OrderBand {
    double lo = 0.0;
    double hi = 0.0;
};

inline OrderBand order_band(Scheme s) { return s == Scheme::euler ? OrderBand{1.6, 2.4} : OrderBand{3.2, 4.8}; }

/// E(h) = max over t in {T/c, 2T/c, ..., T} of W1 against the run at h_ref with
/// the same scheme; asserts the ratios E(h)/E(h/2) of the last two pairs lie in
/// the band of the scheme's order.
inline ExperimentReport h_convergence_experiment(const Ensemble& ensemble0, const std::vector<double>& h_list,
                                                 double h_ref, const IntegratorConfig& cfg, const GameModel& model,
                                                 std::size_t check_points = 10) {
    detail::Stopwatch sw;
    if (h_list.empty()) throw ConfigError("converge-h needs at least one step size");
    if (check_points == 0) throw ConfigError("converge-h needs at least one check point");
    for (std::size_t i = 0; i + 1 < h_list.size(); ++i) {
        if (std::abs(h_list[i + 1] - 0.5 * h_list[i]) > 1e-12 * h_list[i]) {
            throw ConfigError("converge-h step sizes must form a halving sequence");
        }
    }
    if (!(h_ref < h_list.back())) throw ConfigError("converge-h reference step must be finer than every h");

    auto run = [&](double h) {
        IntegratorConfig c = cfg;
        c.h = h;
        const double per = cfg.T / (static_cast<double>(check_points) * h);
        const double rounded = std::round(per);
        if (rounded < 1.0 || std::abs(per - rounded) > 1e-6 * per) {
            throw ConfigError("converge-h: T / (check_points h) must be an integer for every h");
        }
        c.stride = static_cast<std::size_t>(rounded);
        c.threads = 1;
        Trajectory t = integrate(ensemble0, c, model);
        if (t.size() != check_points + 1) throw ConfigError("converge-h: unexpected snapshot count");
        return t;
    };

    std::vector<double> all_h = h_list;
    all_h.push_back(h_ref);
    std::vector<Trajectory> runs(all_h.size());
    parallel_for(all_h.size(), cfg.threads, [&](std::size_t i) { runs[i] = run(all_h[i]); });
    const Trajectory& ref = runs.back();

    ExperimentReport r;
    r.name = "converge-h";
    r.set("h_ref", h_ref);
    std::vector<double> err(h_list.size(), 0.0);
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        for (std::size_t k = 1; k <= check_points; ++k) {
            err[i] = std::max(err[i], w1_ensembles(runs[i].states[k], ref.states[k], model.space()).value);
        }
        r.set("E(h=" + json(h_list[i]).dump() + ")", err[i]);
    }
    const OrderBand band = order_band(cfg.scheme);
    r.set("band_lo", band.lo);
    r.set("band_hi", band.hi);
    const bool exact = std::all_of(err.begin(), err.end(), [](double e) { return e <= 1e-13; });
    r.set("exact", exact ? 1.0 : 0.0);
    const std::size_t pairs = h_list.size() - 1;
    const std::size_t first = pairs > 2 ? pairs - 2 : 0;
    bool in_band = true;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double ratio = err[i + 1] > 0.0 ? err[i] / err[i + 1] : std::numeric_limits<double>::infinity();
        r.set("ratio(" + json(h_list[i]).dump() + "/" + json(h_list[i + 1]).dump() + ")", ratio);
        if (i >= first) in_band = in_band && ratio >= band.lo && ratio <= band.hi;
    }
    if (pairs == 0) in_band = false;
    r.check("E(h)/E(h/2) within the order band for the last pairs", exact || in_band);
    r.config_echo = detail::provenance(model, cfg);
    r.config_echo["h_list"] = h_list;
    r.config_echo["h_ref"] = h_ref;
    r.config_echo["check_points"] = check_points;
    r.runtime_s = sw.seconds();
    return r;
}

// ------------------------------------------------------- Eulerian residual

/// phi(x, sigma) = psi(x, s) with s = g . sigma; psi is a polynomial given with
/// its partial derivatives.
struct CylindricalTest {
    std::string name;
    std::vector<double> g;
    std::function<double(std::span<const double>, double)> psi;
    // writes d psi / dx into grad_x and returns d psi / ds
    std::function<double(std::span<const double>, double, std::span<double>)> dpsi;
};

inline std::vector<CylindricalTest> standard_test_battery(std::size_t K) {
    std::vector<double> g(K);
    for (std::size_t k = 0; k < K; ++k) g[k] = 1.0 - 0.75 * static_cast<double>(k);
    std::vector<CylindricalTest> out;
    out.push_back({"one", g, [](std::span<const double>, double) { return 1.0; },
                   [](std::span<const double>, double, std::span<double> gx) {
                       std::fill(gx.begin(), gx.end(), 0.0);
                       return 0.0;
                   }});
    out.push_back({"x1", g, [](std::span<const double> x, double) { return x[0]; },
                   [](std::span<const double>, double, std::span<double> gx) {
                       std::fill(gx.begin(), gx.end(), 0.0);
                       gx[0] = 1.0;
                       return 0.0;
                   }});
    out.push_back({"s_squared", g, [](std::span<const double>, double s) { return s * s; },
                   [](std::span<const double>, double s, std::span<double> gx) {
                       std::fill(gx.begin(), gx.end(), 0.0);
                       return 2.0 * s;
                   }});
    out.push_back({"x1_times_s", g, [](std::span<const double> x, double s) { return x[0] * s; },
                   [](std::span<const double> x, double s, std::span<double> gx) {
                       std::fill(gx.begin(), gx.end(), 0.0);
                       gx[0] = s;
                       return x[0];
                   }});
    out.push_back({"x_norm_squared", g,
                   [](std::span<const double> x, double) {
                       double n = 0.0;
                       for (double v : x) n += v * v;
                       return n;
                   },
                   [](std::span<const double> x, double, std::span<double> gx) {
                       for (std::size_t c = 0; c < x.size(); ++c) gx[c] = 2.0 * x[c];
                       return 0.0;
                   }});
    return out;
}

struct ResidualSummary {
    double summed = 0.0;   // sum over steps of |residual|
    double max_step = 0.0; // largest single-step |residual|
};

/// Per step k: sum_a m_a [phi(y_a^{k+1}) - phi(y_a^k)] - h_k sum_a m_a Dphi(y_a^k) b(y_a^k).
inline ResidualSummary eulerian_residual(const Trajectory& traj, const GameModel& model, const CylindricalTest& test) {
    ResidualSummary out;
    std::vector<double> gx(model.dim());
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        const Ensemble& e0 = traj.states[k];
        const Ensemble& e1 = traj.states[k + 1];
        const double h = traj.times[k + 1] - traj.times[k];
        const FieldEvaluator eval(e0, model);
        double delta = 0.0, drift = 0.0;
        for (std::size_t a = 0; a < e0.size(); ++a) {
            const AgentState& y0 = e0.agent(a);
            const AgentState& y1 = e1.agent(a);
            double s0 = 0.0, s1 = 0.0;
            for (std::size_t i = 0; i < test.g.size(); ++i) {
                s0 += test.g[i] * y0.sigma[i];
                s1 += test.g[i] * y1.sigma[i];
            }
            delta += e0.mass(a) * (test.psi(y1.x, s1) - test.psi(y0.x, s0));
            const Tangent b = eval.field(y0);
            const double ds = test.dpsi(y0.x, s0, gx);
            double d = 0.0;
            for (std::size_t c = 0; c < gx.size(); ++c) d += gx[c] * b.x[c];
            double gs = 0.0;
            for (std::size_t i = 0; i < test.g.size(); ++i) gs += test.g[i] * b.sigma[i];
            d += ds * gs;
            drift += e0.mass(a) * d;
        }
        const double res = std::abs(delta - h * drift);
        out.summed += res;
        out.max_step = std::max(out.max_step, res);
    }
    return out;
}

inline constexpr double eulerian_trivial_floor = 1e-10;
inline constexpr double eulerian_stability_factor = 1.5;

/// Runs the dynamics at h and h/2 with every step stored and compares the
/// constants C(h) = summed residual / h.
inline ExperimentReport eulerian_residual_experiment(const Ensemble& ensemble0, const IntegratorConfig& cfg,
                                                     const GameModel& model,
                                                     const std::vector<CylindricalTest>& tests) {
    detail::Stopwatch sw;
    if (tests.empty()) throw ConfigError("eulerian: empty test battery");
    for (const auto& t : tests)
        if (t.g.size() != model.strategies()) throw ConfigError("eulerian: test vector g must have length K");
    ExperimentReport r;
    r.name = "eulerian";
    std::vector<Trajectory> runs(2);
    parallel_for(2, cfg.threads, [&](std::size_t i) {
        IntegratorConfig c = cfg;
        c.h = i == 0 ? cfg.h : 0.5 * cfg.h;
        c.stride = 1;
        c.threads = 1;
        runs[i] = integrate(ensemble0, c, model);
    });
    r.set("h", cfg.h);
    for (const auto& t : tests) {
        const auto a = eulerian_residual(runs[0], model, t);
        const auto b = eulerian_residual(runs[1], model, t);
        const double Ca = a.summed / cfg.h;
        const double Cb = b.summed / (0.5 * cfg.h);
        r.set(t.name + ".summed_h", a.summed);
        r.set(t.name + ".summed_h_half", b.summed);
        r.set(t.name + ".C_h", Ca);
        r.set(t.name + ".C_h_half", Cb);
        r.set(t.name + ".max_step_over_h2", a.max_step / (cfg.h * cfg.h));
        const bool trivial = a.summed <= eulerian_trivial_floor && b.summed <= eulerian_trivial_floor;
        const double ratio = Cb > 0.0 ? Ca / Cb : std::numeric_limits<double>::infinity();
        if (!trivial) r.set(t.name + ".C_ratio", ratio);
        r.check(t.name + ": C(h) stable across one halving",
                trivial || (ratio <= eulerian_stability_factor && ratio >= 1.0 / eulerian_stability_factor));
    }
    r.config_echo = detail::provenance(model, cfg);
    json battery = json::array();
    for (const auto& t : tests) battery.push_back(json{{"name", t.name}, {"g", t.g}});
    r.config_echo["tests"] = battery;
    r.runtime_s = sw.seconds();
    return r;
}

// ----------------------------------------------------------- folk theorems

struct FolkOptions {
    double h = 0.01;
    double T_rps = 10.0;
    double T_pd = 50.0;
    double T_dominated = 100.0;
};

/// Plain replicator run of a single agent playing against itself.
inline Trajectory homogeneous_run(const GameModel& model, const MixedStrategy& sigma0, double h, double T) {
    IntegratorConfig c;
    c.h = h;
    c.T = T;
    c.stride = std::max<std::size_t>(1, step_count(c));
    return integrate(fixtures::single_agent(sigma0, model.dim()), c, model);
}

/// (a) RPS barycenter is stationary, (b) prisoner's dilemma converges to
/// defection, (c) a strictly dominated strategy dies out. `pd` defaults to the
/// built-in prisoner's dilemma.
inline ExperimentReport folk_theorem_suite(const FolkOptions& opt = {}, std::optional<GameModel> pd = std::nullopt,
                                           std::optional<MixedStrategy> pd_start = std::nullopt) {
    detail::Stopwatch sw;
    ExperimentReport r;
    r.name = "folk";
    const GameModel rps = fixtures::rps_homogeneous();
    const GameModel pdm = pd ? *pd : fixtures::prisoners_dilemma();
    const GameModel dom = fixtures::dominated_game();
    if (pdm.strategies() != 2) throw ConfigError("folk: the prisoner's dilemma model must have two strategies");
    {
        const auto& A = pdm.payoff_family().matrix;
        // (C, D) with T > R > P > S, T = A(1,0), R = A(0,0), P = A(1,1), S = A(0,1)
        if (!(A(1, 0) > A(0, 0) && A(0, 0) > A(1, 1) && A(1, 1) > A(0, 1))) {
            throw ConfigError("folk: payoff matrix is not a prisoner's dilemma (need T > R > P > S)");
        }
        if (pdm.payoff_family().kernel.kind != KernelKind::constant || pdm.ledger().L_e != 0.0) {
            throw ConfigError("folk: the model must be spatially homogeneous (constant kernel, zero velocity)");
        }
    }

    const auto bary = MixedStrategy::uniform(3);
    const Trajectory a = homogeneous_run(rps, bary, opt.h, opt.T_rps);
    const double drift = tv_norm(a.back().agent(0).sigma - bary) / opt.T_rps;
    r.set("rps.drift_per_unit_time", drift);
    r.check("RPS barycenter drift <= 1e-8 per unit time", drift <= 1e-8);

    const MixedStrategy s0 = pd_start ? *pd_start : MixedStrategy::uniform(2);
    const Trajectory b = homogeneous_run(pdm, s0, opt.h, opt.T_pd);
    const double tv_defect = tv_norm(b.back().agent(0).sigma - MixedStrategy::dirac(2, 1));
    r.set("pd.tv_to_defect", tv_defect);
    r.check("prisoner's dilemma TV distance to defection <= 1e-3", tv_defect <= 1e-3);

    const Trajectory c = homogeneous_run(dom, MixedStrategy::uniform(3), opt.h, opt.T_dominated);
    const double dominated_mass = c.back().agent(0).sigma[fixtures::dominated_row];
    r.set("dominated.mass", dominated_mass);
    r.check("dominated strategy mass <= 1e-6", dominated_mass <= 1e-6);

    r.config_echo = json{{"h", opt.h},
                         {"T_rps", opt.T_rps},
                         {"T_pd", opt.T_pd},
                         {"T_dominated", opt.T_dominated},
                         {"pd_model", to_json(pdm)},
                         {"pd_start", std::vector<double>(s0.weights().begin(), s0.weights().end())}};
    r.runtime_s = sw.seconds();
    return r;
}

// ----------------------------------------------------------- flow Lipschitz

using ProbePair = std::pair<AgentState, AgentState>;

/// Probe pairs around agents of `base`: y is a perturbed copy of a random
/// agent, y' moves y by `offset` in position and mixes its strategy a little
/// towards a random point of the simplex.
inline std::vector<ProbePair> make_probe_pairs(const Ensemble& base, std::size_t count, double offset,
                                               std::uint64_t seed) {
    rng::Engine g(seed);
    const std::size_t K = base.strategies();
    const std::vector<double> ones(K, 1.0);
    std::vector<ProbePair> out;
    for (std::size_t p = 0; p < count; ++p) {
        const auto idx = static_cast<std::size_t>(rng::uniform01(g) * static_cast<double>(base.size()));
        AgentState y = base.agent(std::min(idx, base.size() - 1));
        AgentState yp = y;
        const auto u = detail::random_unit(g, y.x.size());
        for (std::size_t c = 0; c < y.x.size(); ++c) yp.x[c] += offset * u[c];
        const auto target = rng::dirichlet(g, ones);
        std::vector<double> s(K);
        for (std::size_t k = 0; k < K; ++k) s[k] = (1.0 - offset) * y.sigma[k] + offset * target[k];
        yp.sigma = MixedStrategy::from_step(std::move(s));
        out.emplace_back(std::move(y), std::move(yp));
    }
    return out;
}

/// Flows the probe pairs through the background and checks
/// d_C(Y_t(y), Y_t(y')) <= e^{Lt} d_C(y, y') (1 + tol_disc); also checks the per
/// step TV speed of every agent of the background.
inline ExperimentReport flow_lipschitz_experiment(const Trajectory& background, const GameModel& model,
                                                  const std::vector<ProbePair>& probes, unsigned threads = 1) {
    detail::Stopwatch sw;
    if (background.size() < 2) throw ConfigError("flow-lipschitz: background needs at least two stored times");
    ExperimentReport r;
    r.name = "flow-lipschitz";
    const double L = model.ledger().L;
    double h = 0.0;
    for (std::size_t k = 0; k + 1 < background.size(); ++k) h = std::max(h, background.times[k + 1] - background.times[k]);
    const double slack = tol_disc(model, h);

    std::vector<AgentState> starts;
    for (const auto& p : probes) {
        starts.push_back(p.first);
        starts.push_back(p.second);
    }
    const auto paths = flow_many(starts, background, model, threads);
    std::vector<double> worst(probes.size(), 0.0);
    std::vector<char> ok(probes.size(), 1);
    parallel_for(probes.size(), threads, [&](std::size_t p) {
        const auto& A = paths[2 * p];
        const auto& B = paths[2 * p + 1];
        const double d0 = d_C(A[0], B[0], model.space());
        for (std::size_t k = 0; k < A.size(); ++k) {
            const double d = d_C(A[k], B[k], model.space());
            const double env = std::exp(L * background.times[k]) * d0;
            if (env > 0.0) worst[p] = std::max(worst[p], d / env);
            if (d > env * (1.0 + slack) + zero_floor) ok[p] = 0;
        }
    });
    r.set("L", L);
    r.set("h", h);
    r.set("tol_disc", slack);
    r.set("probe_pairs", static_cast<double>(probes.size()));
    r.set("worst_ratio", probes.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end()));
    r.set("ratio_bound", 1.0 + slack);
    r.check("d_C(Y_t y, Y_t y') <= e^{Lt} d_C(y, y') (1 + tol_disc) for every probe pair",
            std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; }));

    const auto& led = model.ledger();
    double worst_tv = 0.0;
    bool tv_ok = true;
    for (std::size_t k = 0; k + 1 < background.size(); ++k) {
        const double hk = background.times[k + 1] - background.times[k];
        const double bound = hk * led.L_J * led.diam * (1.0 + 10.0 * L * hk);
        for (std::size_t a = 0; a < background.states[k].size(); ++a) {
            const double tv = tv_norm(background.states[k + 1].agent(a).sigma - background.states[k].agent(a).sigma);
            if (bound > 0.0) worst_tv = std::max(worst_tv, tv / bound);
            if (tv > bound + zero_floor) tv_ok = false;
        }
    }
    r.set("worst_tv_speed_ratio", worst_tv);
    r.check("per-step TV speed <= h L_J diam(U) (1 + 10 L h) for every agent", tv_ok);
    r.config_echo = json{{"model", to_json(model)}, {"ledger", to_json(led)}, {"stored_times", background.size()}};
    r.runtime_s = sw.seconds();
    return r;
}

// ------------------------------------------------------------------ Picard

inline constexpr double picard_residual_floor = 1e-9;

/// Largest ratio of successive weighted residuals, skipping residuals at or
/// below the floor where roundoff dominates.
inline double contraction_factor(const std::vector<double>& weighted) {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < weighted.size(); ++k) {
        if (weighted[k] > picard_residual_floor && weighted[k + 1] > picard_residual_floor) {
            worst = std::max(worst, weighted[k + 1] / weighted[k]);
        }
    }
    return worst;
}

/// picard_solve against integrate on the same grid: contraction in the
/// weighted sup metric and agreement within 10 h in sup-W1.
inline ExperimentReport picard_experiment(const Ensemble& ensemble0, const IntegratorConfig& cfg,
                                          const GameModel& model, const PicardOptions& opts = {}) {
    detail::Stopwatch sw;
    if (!(opts.weight_factor > 1.0)) throw ConfigError("picard: weight factor must exceed 1");
    ExperimentReport r;
    r.name = "picard";
    IntegratorConfig c = cfg;
    c.stride = 1;
    c.scheme = Scheme::euler;
    c.mode = Mode::deterministic;
    const double L = model.ledger().L;
    const double bound = 1.0 / (opts.weight_factor - 1.0) + 0.1;
    r.set("L", L);
    r.set("L_prime", opts.weight_factor * L);
    r.set("contraction_bound", bound);
    r.set("h", c.h);
    try {
        const PicardResult pr = picard_solve(ensemble0, c, model, opts);
        const Trajectory direct = integrate(ensemble0, c, model);
        const auto w1 = w1_profile(pr.solution, direct, model.space(), c.threads);
        const double gap = *std::max_element(w1.begin(), w1.end());
        const double q = contraction_factor(pr.weighted_residuals);
        r.set("iterations", static_cast<double>(pr.iterations));
        r.set("contraction_factor", q);
        r.set("final_residual", pr.residuals.back());
        r.set("sup_w1_vs_integrate", gap);
        r.set("agreement_bound", 10.0 * c.h);
        for (std::size_t k = 0; k < pr.weighted_residuals.size(); ++k) {
            r.set("weighted_residual_" + std::to_string(k + 1), pr.weighted_residuals[k]);
        }
        r.check("contraction factor <= 1/(L'/L - 1) + 0.1", q <= bound);
        r.check("sup-W1(picard, integrate) <= 10 h", gap <= 10.0 * c.h);
    } catch (const NoConvergence& e) {
        r.set("iterations", static_cast<double>(opts.max_iters));
        r.set("final_residual", e.residuals().empty() ? std::numeric_limits<double>::infinity() : e.residuals().back());
        r.check("picard iteration converged", false);
    }
    r.config_echo = detail::provenance(model, c);
    r.config_echo["picard"] = json{{"tol", opts.tol}, {"max_iters", opts.max_iters}, {"weight_factor", opts.weight_factor}};
    r.runtime_s = sw.seconds();
    return r;
}

// ---------------------------------------------------- belief-update scheme

/// Mean one-step increment of the stochastic belief update over `samples`
/// independent transitions from the same ensemble, against h times the
/// deterministic field, componentwise within 3 standard errors.
inline ExperimentReport belief_update_consistency(const Ensemble& ensemble, double h, const GameModel& model,
                                                  std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
    detail::Stopwatch sw;
    if (samples < 2) throw ConfigError("belief-update consistency needs at least two samples");
    const std::size_t N = ensemble.size(), d = model.dim(), K = model.strategies();
    const std::size_t comps = N * (d + K);
    const auto field = mean_field_all(ensemble, model);

    // per-block accumulators keep the sum independent of the thread count
    const std::size_t blocks = 64;
    std::vector<std::vector<double>> sum(blocks, std::vector<double>(comps, 0.0)), sq = sum;
    parallel_for(blocks, threads, [&](std::size_t blk) {
        const std::size_t lo = blk * samples / blocks, hi = (blk + 1) * samples / blocks;
        for (std::size_t s = lo; s < hi; ++s) {
            auto streams = agent_streams(rng::stream_seed(seed, s), N);
            const Ensemble next = belief_update_step(ensemble, h, model, streams);
            for (std::size_t a = 0; a < N; ++a) {
                for (std::size_t c = 0; c < d; ++c) {
                    const double inc = next.agent(a).x[c] - ensemble.agent(a).x[c];
                    sum[blk][a * (d + K) + c] += inc;
                    sq[blk][a * (d + K) + c] += inc * inc;
                }
                for (std::size_t k = 0; k < K; ++k) {
                    const double inc = next.agent(a).sigma[k] - ensemble.agent(a).sigma[k];
                    sum[blk][a * (d + K) + d + k] += inc;
                    sq[blk][a * (d + K) + d + k] += inc * inc;
                }
            }
        }
    });

    ExperimentReport r;
    r.name = "belief-update";
    const double n = static_cast<double>(samples);
    double worst_z = 0.0, worst_sigma_gap = 0.0;
    std::size_t failures = 0;
    for (std::size_t a = 0; a < N; ++a) {
        for (std::size_t j = 0; j < d + K; ++j) {
            const std::size_t idx = a * (d + K) + j;
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t b = 0; b < blocks; ++b) {
                s1 += sum[b][idx];
                s2 += sq[b][idx];
            }
            const double mean = s1 / n;
            const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
            const double se = std::sqrt(var / n);
            const double expected = h * (j < d ? field[a].x[j] : field[a].sigma[j - d]);
            const double gap = std::abs(mean - expected);
            // deterministic components have roundoff-sized se; the floor judges them
            if (3.0 * se > zero_floor) worst_z = std::max(worst_z, gap / se);
            if (j >= d) worst_sigma_gap = std::max(worst_sigma_gap, gap);
            if (gap > std::max(3.0 * se, zero_floor)) ++failures;
        }
    }
    r.set("h", h);
    r.set("samples", n);
    r.set("components", static_cast<double>(comps));
    r.set("worst_z", worst_z);
    r.set("worst_sigma_gap", worst_sigma_gap);
    r.set("failures", static_cast<double>(failures));
    r.check("mean increment within 3 standard errors of h b in every component", failures == 0);
    r.config_echo = json{{"model", to_json(model)}, {"h", h}, {"samples", samples}, {"seed", seed}};
    r.runtime_s = sw.seconds();
    return r;
}

} // namespace spatgame::verify
