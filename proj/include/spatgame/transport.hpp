#pragma once

// Metric layer on C = R^d x P(U): the distance d_C between agent states and
// exact W1 between weighted atomic ensembles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "spatgame/errors.hpp"
#include "spatgame/lp.hpp"
#include "spatgame/model.hpp"
#include "spatgame/parallel.hpp"
#include "spatgame/strategy_space.hpp"
#include "spatgame/trajectory.hpp"

namespace spatgame {

/// d_C(y1, y2) = |x1 - x2| + ||sigma1 - sigma2||_BL
inline double d_C(const AgentState& y1, const AgentState& y2, const StrategySpace& space) {
    if (y1.x.size() != y2.x.size()) throw ConfigError("d_C: position dimensions differ");
    const double dx = GameModel::distance(y1.x, y2.x);
    if (y1.sigma == y2.sigma) return dx;
    return dx + bl_norm(y1.sigma - y2.sigma, space);
}

/// Transport plan between ensembles: plan(i, j) is the mass moved from atom i
/// of the first ensemble to atom j of the second.
struct Coupling {
    lp::Matrix plan;

    std::size_t rows() const noexcept { return plan.rows(); }
    std::size_t cols() const noexcept { return plan.cols(); }

    /// Largest deviation of the row/column sums from the given marginals.
    double marginal_error(const std::vector<double>& row_masses, const std::vector<double>& col_masses) const {
        double err = 0.0;
        for (std::size_t i = 0; i < rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols(); ++j) s += plan(i, j);
            err = std::max(err, std::abs(s - row_masses[i]));
        }
        for (std::size_t j = 0; j < cols(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < rows(); ++i) s += plan(i, j);
            err = std::max(err, std::abs(s - col_masses[j]));
        }
        return err;
    }
};

struct W1Result {
    double value = 0.0;
    Coupling coupling;
    lp::Matrix cost;
};

inline lp::Matrix ground_cost(const Ensemble& A, const Ensemble& B, const StrategySpace& space,
                              unsigned threads = 1) {
    if (A.dim() != B.dim() || A.strategies() != B.strategies() || A.strategies() != space.size()) {
        throw ConfigError("ensembles live on different state spaces");
    }
    lp::Matrix cost(A.size(), B.size());
    parallel_for(A.size(), threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < B.size(); ++j) cost(i, j) = d_C(A.agent(i), B.agent(j), space);
    });
    return cost;
}

/// Exact W1 between two atomic ensembles with ground cost d_C.
inline W1Result w1_ensembles(const Ensemble& A, const Ensemble& B, const StrategySpace& space,
                             unsigned threads = 1) {
    W1Result out;
    out.cost = ground_cost(A, B, space, threads);
    auto tp = lp::solve_transport(A.masses(), B.masses(), out.cost);
    out.value = tp.cost;
    out.coupling.plan = std::move(tp.plan);
    double imbalance = 0.0;
    for (double m : A.masses()) imbalance += m;
    for (double m : B.masses()) imbalance -= m;
    const double err = out.coupling.marginal_error(A.masses(), B.masses());
    if (err > 1e-10 + std::abs(imbalance)) throw SolverFailure("w1_ensembles: coupling marginals off by " + std::to_string(err));
    return out;
}

/// Merges atoms with identical positions and strategies equal within 1e-12,
/// summing their masses. The first occurrence keeps its state.
inline Ensemble merge_duplicates(const Ensemble& e, double strategy_tol = 1e-12) {
    std::vector<AgentState> agents;
    std::vector<double> masses;
    for (std::size_t a = 0; a < e.size(); ++a) {
        const AgentState& y = e.agent(a);
        bool merged = false;
        for (std::size_t b = 0; b < agents.size() && !merged; ++b) {
            if (agents[b].x != y.x) continue;
            double diff = 0.0;
            for (std::size_t k = 0; k < y.sigma.size(); ++k) diff = std::max(diff, std::abs(agents[b].sigma[k] - y.sigma[k]));
            if (diff <= strategy_tol) {
                masses[b] += e.mass(a);
                merged = true;
            }
        }
        if (!merged) {
            agents.push_back(y);
            masses.push_back(e.mass(a));
        }
    }
    return Ensemble(std::move(agents), std::move(masses));
}

/// W1(T1_t, T2_t) at every time of a shared grid.
inline std::vector<double> w1_profile(const Trajectory& T1, const Trajectory& T2, const StrategySpace& space,
                                      unsigned threads = 1) {
    if (T1.times.size() != T2.times.size()) throw GridMismatch("time grids have different lengths");
    for (std::size_t k = 0; k < T1.times.size(); ++k) {
        if (std::abs(T1.times[k] - T2.times[k]) > 1e-12 * (1.0 + std::abs(T1.times[k]))) {
            throw GridMismatch("time grids differ at index " + std::to_string(k));
        }
    }
    std::vector<double> out(T1.times.size(), 0.0);
    parallel_for(T1.times.size(), threads, [&](std::size_t k) {
        if (T1.states[k] == T2.states[k]) return;
        out[k] = w1_ensembles(T1.states[k], T2.states[k], space).value;
    });
    return out;
}

/// max_k exp(-L' t_k) w1[k]
inline double weighted_sup(const std::vector<double>& times, const std::vector<double>& w1, double L_prime) {
    double best = 0.0;
    for (std::size_t k = 0; k < w1.size(); ++k) best = std::max(best, std::exp(-L_prime * times[k]) * w1[k]);
    return best;
}

/// max over the shared time grid of exp(-L' t) W1(T1_t, T2_t).
inline double curve_distance(const Trajectory& T1, const Trajectory& T2, double L_prime,
                             const StrategySpace& space, unsigned threads = 1) {
    return weighted_sup(T1.times, w1_profile(T1, T2, space, threads), L_prime);
}

} // namespace spatgame
