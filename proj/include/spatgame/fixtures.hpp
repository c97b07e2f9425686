#pragma once

// Canonical model instances used by the experiments and acceptance checks.
// The standard fixture is also frozen as configs/standard.json.

#include <cmath>
#include <cstdint>
#include <vector>

#include "spatgame/config.hpp"
#include "spatgame/dynamics.hpp"
#include "spatgame/model.hpp"

namespace spatgame::fixtures {

inline constexpr std::uint64_t standard_seed = 42;
inline constexpr std::size_t standard_agents = 16;

inline lp::Matrix rps_matrix() {
    lp::Matrix A(3, 3);
    const double v[3][3] = {{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) A(i, j) = v[i][j];
    return A;
}

/// Three strategies at unit mutual distance, RPS payoffs under a Gaussian
/// kernel of bandwidth 1, and velocities 0.1 times the centred vertices of the
/// triangle spanned by U.
inline GameModel standard_model() {
    StrategySpace space = StrategySpace::discrete({"R", "P", "S"});
    lp::Matrix V(3, 2);
    const double r = 1.0 / std::sqrt(3.0);
    const double verts[3][2] = {{0.0, r}, {-0.5, -0.5 * r}, {0.5, -0.5 * r}};
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t c = 0; c < 2; ++c) V(k, c) = 0.1 * verts[k][c];
    return GameModel(std::move(space), 2, PayoffFamily{rps_matrix(), SpatialKernel{KernelKind::gaussian, 1.0}},
                     VelocityFamily{V, 0.0}, 100.0);
}

inline SamplerSpec standard_sampler(std::size_t n = standard_agents) {
    SamplerSpec s;
    s.n = n;
    s.position = PositionKind::gaussian;
    s.mean = {0.0, 0.0};
    s.std_dev = 1.0;
    s.strategy = StrategyKind::dirichlet;
    s.alpha = {1.0, 1.0, 1.0};
    return s;
}

inline Ensemble standard_ensemble(std::size_t n = standard_agents, std::uint64_t seed = standard_seed) {
    return sample_ensemble(standard_sampler(n), 2, 3, derive_seed(seed, SeedPurpose::sampler));
}

inline IntegratorConfig standard_integrator() {
    IntegratorConfig c;
    c.scheme = Scheme::euler;
    c.h = 1e-3;
    c.T = 1.0;
    c.rng_seed = derive_seed(standard_seed, SeedPurpose::dynamics);
    return c;
}

/// Spatially homogeneous model: constant kernel, zero velocity, d = 1,
/// discrete metric on U.
inline GameModel homogeneous_model(const lp::Matrix& A, std::vector<std::string> labels) {
    const std::size_t K = labels.size();
    return GameModel(StrategySpace::discrete(std::move(labels)), 1,
                     PayoffFamily{A, SpatialKernel{KernelKind::constant, 1.0}}, VelocityFamily{lp::Matrix(K, 1), 0.0});
}

/// Prisoner's dilemma, strategies (cooperate, defect).
inline GameModel prisoners_dilemma() {
    lp::Matrix A(2, 2);
    A(0, 0) = 3;
    A(0, 1) = 0;
    A(1, 0) = 5;
    A(1, 1) = 1;
    return homogeneous_model(A, {"C", "D"});
}

inline GameModel rps_homogeneous() { return homogeneous_model(rps_matrix(), {"R", "P", "S"}); }

/// 3x3 game whose third row is beaten by the first by exactly 1 in every column.
inline GameModel dominated_game() {
    lp::Matrix A(3, 3);
    const double v[3][3] = {{2, 0, 3}, {0, 2, 3}, {1, -1, 2}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) A(i, j) = v[i][j];
    return homogeneous_model(A, {"a", "b", "c"});
}

inline constexpr std::size_t dominated_row = 2;

/// One agent of unit mass at the origin.
inline Ensemble single_agent(const MixedStrategy& sigma, std::size_t dim = 1) {
    return Ensemble({AgentState{std::vector<double>(dim, 0.0), sigma}}, {1.0});
}

} // namespace spatgame::fixtures
