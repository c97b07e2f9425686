#pragma once

// Time integration of the N-agent system y_i' = sum_j m_j f(y_i, y_j), the
// stochastic belief-update scheme, flows in a frozen background curve, and the
// Picard iteration on curves of ensembles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "spatgame/errors.hpp"
#include "spatgame/model.hpp"
#include "spatgame/parallel.hpp"
#include "spatgame/rng.hpp"
#include "spatgame/trajectory.hpp"
#include "spatgame/transport.hpp"

namespace spatgame {

enum class Scheme { euler, heun };
enum class Mode { deterministic, belief_update };

inline std::string to_string(Scheme s) { return s == Scheme::euler ? "euler" : "heun"; }
inline std::string to_string(Mode m) { return m == Mode::deterministic ? "deterministic" : "belief_update"; }

struct IntegratorConfig {
    Scheme scheme = Scheme::euler;
    Mode mode = Mode::deterministic;
    double h = 1e-3;
    double T = 1.0;
    bool theta_guard = true;
    double safety = 0.5;
    std::uint64_t rng_seed = 0;
    std::size_t stride = 0; // 0: every step up to 1e4 snapshots, strided beyond
    unsigned threads = 1;   // 0: hardware concurrency; never changes results

    static constexpr std::size_t max_default_snapshots = 10000;
};

inline void validate(const IntegratorConfig& cfg, const GameModel& model) {
    if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) throw ConfigError("step size h must be positive and finite");
    if (!(cfg.T >= 0.0) || !std::isfinite(cfg.T)) throw ConfigError("horizon T must be nonnegative and finite");
    if (!(cfg.safety > 0.0) || cfg.safety > 1.0) throw ConfigError("theta safety factor must lie in (0, 1]");
    if (cfg.mode == Mode::belief_update && cfg.scheme != Scheme::euler) {
        throw ConfigError("the belief-update mode is a first-order scheme; use scheme = euler");
    }
    const double theta_max = model.ledger().theta_max;
    if (cfg.theta_guard && cfg.scheme == Scheme::euler && cfg.h > cfg.safety * theta_max) {
        std::ostringstream os;
        os << "step size h = " << cfg.h << " exceeds safety * theta_max = " << cfg.safety * theta_max
           << " (theta_max = " << theta_max << ")";
        throw ConfigError(os.str());
    }
}

inline std::size_t step_count(const IntegratorConfig& cfg) {
    if (cfg.T == 0.0) return 0;
    const double n = std::ceil(cfg.T / cfg.h - 1e-9);
    return static_cast<std::size_t>(std::max(1.0, n));
}

/// Time of grid point k; the last point is exactly T.
inline double grid_time(const IntegratorConfig& cfg, std::size_t k, std::size_t n) {
    return k == n ? cfg.T : static_cast<double>(k) * cfg.h;
}

inline std::size_t effective_stride(const IntegratorConfig& cfg, std::size_t n) {
    if (cfg.stride > 0) return cfg.stride;
    if (n <= IntegratorConfig::max_default_snapshots) return 1;
    return (n + IntegratorConfig::max_default_snapshots - 1) / IntegratorConfig::max_default_snapshots;
}

namespace detail {

inline void check_position(const AgentState& y, const GameModel& model, std::size_t agent) {
    if (!model.position_bound()) return;
    double n2 = 0.0;
    for (double v : y.x) n2 += v * v;
    if (std::sqrt(n2) > *model.position_bound()) {
        std::ostringstream os;
        os << "agent " << agent << " left the ball |x| <= " << *model.position_bound() << " (|x| = " << std::sqrt(n2)
           << ")";
        throw PositionBoundExceeded(os.str());
    }
}

inline AgentState advance(const AgentState& y, const Tangent& b, double h, std::size_t* clamped) {
    AgentState out;
    out.x.resize(y.x.size());
    for (std::size_t c = 0; c < y.x.size(); ++c) out.x[c] = y.x[c] + h * b.x[c];
    std::vector<double> s(y.sigma.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = y.sigma[i] + h * b.sigma[i];
    out.sigma = MixedStrategy::from_step(std::move(s), clamped);
    return out;
}

/// Updates the diagnostics with one step from `before` to `after` and throws
/// InvariantViolation when a per-step speed limit is exceeded.
inline void record_step(const Ensemble& before, const Ensemble& after, double h, const GameModel& model,
                        StepDiagnostics& diag) {
    const auto& led = model.ledger();
    const double tv_bound = h * led.L_J * led.diam * (1.0 + 10.0 * led.L * h);
    const double x_bound = h * model.velocity_sup();
    for (std::size_t i = 0; i < before.size(); ++i) {
        const auto& y0 = before.agent(i);
        const auto& y1 = after.agent(i);
        double tv = 0.0, mass = 0.0;
        for (std::size_t k = 0; k < y0.sigma.size(); ++k) {
            tv += std::abs(y1.sigma[k] - y0.sigma[k]);
            mass += y1.sigma[k];
        }
        const double dx = GameModel::distance(y0.x, y1.x);
        const double tv_ratio = tv_bound > 0.0 ? tv / tv_bound : (tv > 1e-15 ? std::numeric_limits<double>::infinity() : 0.0);
        const double x_ratio = x_bound > 0.0 ? dx / x_bound : (dx > 1e-15 ? std::numeric_limits<double>::infinity() : 0.0);
        diag.max_tv_speed_ratio = std::max(diag.max_tv_speed_ratio, tv_ratio);
        diag.max_position_speed_ratio = std::max(diag.max_position_speed_ratio, x_ratio);
        diag.max_mass_sum_error = std::max(diag.max_mass_sum_error, std::abs(mass - 1.0));
        if (tv > tv_bound * (1.0 + 1e-9) + 1e-14) {
            throw InvariantViolation("agent " + std::to_string(i) + ": TV speed " + std::to_string(tv / h) +
                                     " exceeds L_J diam U bound");
        }
        if (dx > x_bound * (1.0 + 1e-9) + 1e-14) {
            throw InvariantViolation("agent " + std::to_string(i) + ": position speed exceeds sup|e|");
        }
    }
    ++diag.steps;
}

} // namespace detail

/// One explicit Euler step of the N-agent system; masses are unchanged.
inline Ensemble euler_step(const Ensemble& ensemble, double h, const GameModel& model,
                           StepDiagnostics* diag = nullptr, unsigned threads = 1) {
    const auto fields = mean_field_all(ensemble, model, threads);
    std::vector<AgentState> next(ensemble.size());
    std::vector<std::size_t> clamps(ensemble.size(), 0);
    parallel_for(ensemble.size(), threads,
                 [&](std::size_t i) { next[i] = detail::advance(ensemble.agent(i), fields[i], h, &clamps[i]); });
    if (diag) {
        for (auto c : clamps) diag->clamp_events += c;
    }
    return Ensemble(std::move(next), ensemble.masses());
}

/// Heun (explicit trapezoid) step. Both stages must stay in the simplex;
/// a stage outside it raises SimplexViolation.
inline Ensemble heun_step(const Ensemble& ensemble, double h, const GameModel& model,
                          StepDiagnostics* diag = nullptr, unsigned threads = 1) {
    const auto k1 = mean_field_all(ensemble, model, threads);
    std::vector<AgentState> stage(ensemble.size());
    std::vector<std::size_t> clamps(ensemble.size(), 0);
    parallel_for(ensemble.size(), threads,
                 [&](std::size_t i) { stage[i] = detail::advance(ensemble.agent(i), k1[i], h, &clamps[i]); });
    const Ensemble predictor(std::move(stage), ensemble.masses());
    const auto k2 = mean_field_all(predictor, model, threads);
    std::vector<AgentState> next(ensemble.size());
    parallel_for(ensemble.size(), threads, [&](std::size_t i) {
        Tangent avg;
        avg.x.resize(k1[i].x.size());
        avg.sigma.resize(k1[i].sigma.size());
        for (std::size_t c = 0; c < avg.x.size(); ++c) avg.x[c] = 0.5 * (k1[i].x[c] + k2[i].x[c]);
        for (std::size_t c = 0; c < avg.sigma.size(); ++c) avg.sigma[c] = 0.5 * (k1[i].sigma[c] + k2[i].sigma[c]);
        next[i] = detail::advance(ensemble.agent(i), avg, h, &clamps[i]);
    });
    if (diag) {
        for (auto c : clamps) diag->clamp_events += c;
    }
    return Ensemble(std::move(next), ensemble.masses());
}

/// One realization of the stochastic belief update: every agent replaces
/// sigma by (1 + h Delta) sigma (renormalized), samples a pure strategy u from
/// the updated belief and moves by h e(x, u). `streams` holds one engine per
/// agent, so the outcome does not depend on the thread count.
inline Ensemble belief_update_step(const Ensemble& ensemble, double h, const GameModel& model,
                                   std::span<rng::Engine> streams, unsigned threads = 1) {
    if (streams.size() != ensemble.size()) throw ConfigError("belief_update_step needs one RNG stream per agent");
    const FieldEvaluator eval(ensemble, model);
    const std::size_t K = model.strategies();
    std::vector<AgentState> next(ensemble.size());
    parallel_for(ensemble.size(), threads, [&](std::size_t i) {
        const AgentState& y = ensemble.agent(i);
        std::vector<double> payoff = eval.j_conv(y.x);
        double avg = 0.0;
        for (std::size_t k = 0; k < K; ++k) avg += y.sigma[k] * payoff[k];
        std::vector<double> s(K);
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double mult = 1.0 + h * (payoff[k] - avg);
            if (y.sigma[k] > 0.0 && !(mult > 0.0)) {
                throw MultiplierNegative("agent " + std::to_string(i) + ": belief multiplier 1 + h Delta = " +
                                         std::to_string(mult) + " is not positive");
            }
            s[k] = mult * y.sigma[k];
            total += s[k];
        }
        for (double& v : s) v /= total;
        const std::size_t u = rng::categorical(streams[i], s);
        AgentState out;
        out.x = y.x;
        std::vector<double> e = model.velocity(y.x, u);
        for (std::size_t c = 0; c < out.x.size(); ++c) out.x[c] += h * e[c];
        out.sigma = MixedStrategy::from_step(std::move(s));
        next[i] = std::move(out);
    });
    return Ensemble(std::move(next), ensemble.masses());
}

inline std::vector<rng::Engine> agent_streams(std::uint64_t seed, std::size_t n) {
    std::vector<rng::Engine> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(rng::make_stream(seed, i));
    return out;
}

/// Integrates the system over [0, T]. Speed limits and the position bound
/// are checked after every step.
inline Trajectory integrate(const Ensemble& ensemble0, const IntegratorConfig& cfg, const GameModel& model) {
    validate(cfg, model);
    check_compatible(ensemble0, model);
    for (std::size_t i = 0; i < ensemble0.size(); ++i) detail::check_position(ensemble0.agent(i), model, i);

    const std::size_t n = step_count(cfg);
    const std::size_t stride = effective_stride(cfg, n);
    Trajectory traj;
    traj.push(0.0, ensemble0);
    std::vector<rng::Engine> streams;
    if (cfg.mode == Mode::belief_update) streams = agent_streams(cfg.rng_seed, ensemble0.size());

    Ensemble current = ensemble0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = grid_time(cfg, k, n);
        const double t1 = grid_time(cfg, k + 1, n);
        const double h = t1 - t0;
        Ensemble next = [&] {
            if (cfg.mode == Mode::belief_update) return belief_update_step(current, h, model, streams, cfg.threads);
            if (cfg.scheme == Scheme::heun) return heun_step(current, h, model, &traj.diagnostics, cfg.threads);
            return euler_step(current, h, model, &traj.diagnostics, cfg.threads);
        }();
        detail::record_step(current, next, h, model, traj.diagnostics);
        for (std::size_t i = 0; i < next.size(); ++i) detail::check_position(next.agent(i), model, i);
        current = std::move(next);
        if ((k + 1) % stride == 0 || k + 1 == n) traj.push(t1, current);
    }
    return traj;
}

/// Flows a list of starting states through the frozen background curve:
/// y_{k+1} = y_k + (t_{k+1} - t_k) b_{Lambda_{t_k}}(y_k), i.e. the background is
/// piecewise constant (left endpoint) on each step. Returns one path per
/// starting state, sampled at the background times.
inline std::vector<std::vector<AgentState>> flow_many(const std::vector<AgentState>& starts, const Trajectory& background,
                                                      const GameModel& model, unsigned threads = 1) {
    if (background.times.empty()) throw ConfigError("flow: empty background curve");
    for (const auto& y : starts) check_compatible(y, model);
    std::vector<std::vector<AgentState>> paths(starts.size());
    for (std::size_t a = 0; a < starts.size(); ++a) {
        paths[a].reserve(background.size());
        paths[a].push_back(starts[a]);
    }
    for (std::size_t k = 0; k + 1 < background.size(); ++k) {
        const double h = background.times[k + 1] - background.times[k];
        const FieldEvaluator eval(background.states[k], model);
        parallel_for(starts.size(), threads, [&](std::size_t a) {
            const AgentState& y = paths[a].back();
            paths[a].push_back(detail::advance(y, eval.field(y), h, nullptr));
        });
        for (std::size_t a = 0; a < starts.size(); ++a) detail::check_position(paths[a].back(), model, a);
    }
    return paths;
}

/// Y_Lambda(t, 0, y0) at every background time.
inline std::vector<AgentState> flow_map(const AgentState& y0, const Trajectory& background, const GameModel& model) {
    return flow_many({y0}, background, model).front();
}

/// One application of the Picard map: pushes the atoms of ensemble0 forward
/// along the flow generated by the background curve, keeping their masses.
inline Trajectory picard_map(const Trajectory& curve, const Ensemble& ensemble0, const GameModel& model,
                             unsigned threads = 1) {
    if (curve.states.empty() || !(curve.states.front() == ensemble0)) {
        throw ConfigError("picard_map: the curve must start at the initial ensemble");
    }
    const auto paths = flow_many(ensemble0.agents(), curve, model, threads);
    Trajectory out;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        std::vector<AgentState> atoms(ensemble0.size());
        for (std::size_t a = 0; a < ensemble0.size(); ++a) atoms[a] = paths[a][k];
        out.push(curve.times[k], Ensemble(std::move(atoms), ensemble0.masses()));
    }
    return out;
}

/// Constant curve Lambda_t = ensemble0 on the integration grid of cfg.
inline Trajectory constant_curve(const Ensemble& ensemble0, const IntegratorConfig& cfg) {
    const std::size_t n = step_count(cfg);
    Trajectory out;
    for (std::size_t k = 0; k <= n; ++k) out.push(grid_time(cfg, k, n), ensemble0);
    return out;
}

struct PicardOptions {
    double tol = 1e-6;
    std::size_t max_iters = 50;
    double weight_factor = 2.5; // L' = weight_factor * L for the weighted residuals
};

struct PicardResult {
    Trajectory solution;
    std::vector<double> residuals;          // sup_t W1(T^k, T^{k-1})
    std::vector<double> weighted_residuals; // max_t exp(-L' t) W1(T^k, T^{k-1})
    std::size_t iterations = 0;
};

/// Iterates the Picard map from the constant curve until successive iterates
/// are within tol in sup-W1.
inline PicardResult picard_solve(const Ensemble& ensemble0, const IntegratorConfig& cfg, const GameModel& model,
                                 const PicardOptions& opts = {}) {
    validate(cfg, model);
    check_compatible(ensemble0, model);
    const double L_prime = opts.weight_factor * model.ledger().L;
    PicardResult out;
    Trajectory current = constant_curve(ensemble0, cfg);
    for (std::size_t it = 1; it <= opts.max_iters; ++it) {
        Trajectory next = picard_map(current, ensemble0, model, cfg.threads);
        const auto profile = w1_profile(next, current, model.space(), cfg.threads);
        const double r = weighted_sup(next.times, profile, 0.0);
        out.residuals.push_back(r);
        out.weighted_residuals.push_back(weighted_sup(next.times, profile, L_prime));
        current = std::move(next);
        if (r < opts.tol) {
            out.iterations = it;
            out.solution = std::move(current);
            return out;
        }
    }
    throw NoConvergence("picard_solve: no convergence after " + std::to_string(opts.max_iters) + " iterations",
                        out.residuals);
}

} // namespace spatgame
