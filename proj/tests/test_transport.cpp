#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "spatgame/fixtures.hpp"
#include "spatgame/rng.hpp"
#include "spatgame/transport.hpp"

using namespace spatgame;

namespace {

oracle::Mat to_mat(const lp::Matrix& m) {
    oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

Ensemble random_ensemble(rng::Engine& g, std::size_t n, std::size_t K, bool uniform_mass) {
    std::vector<AgentState> agents;
    std::vector<double> alpha(K, 1.0), ones(n, 1.0);
    for (std::size_t a = 0; a < n; ++a) {
        agents.push_back(AgentState{{rng::uniform(g, -1, 1), rng::uniform(g, -1, 1)},
                                    MixedStrategy::from_step(rng::dirichlet(g, alpha))});
    }
    if (uniform_mass) return Ensemble::uniform(std::move(agents));
    return Ensemble(std::move(agents), rng::dirichlet(g, ones));
}

std::vector<oracle::State> states(const Ensemble& e) {
    std::vector<oracle::State> out;
    for (const auto& y : e.agents()) out.push_back({y.x, std::vector<double>(y.sigma.weights().begin(), y.sigma.weights().end())});
    return out;
}

} // namespace

TEST(DC, Examples) {
    const auto space = StrategySpace::discrete({"a", "b"});
    const AgentState y{{0.0, 0.0}, MixedStrategy::uniform(2)};
    EXPECT_EQ(d_C(y, y, space), 0.0);
    const AgentState z{{3.0, 4.0}, MixedStrategy::uniform(2)};
    EXPECT_DOUBLE_EQ(d_C(y, z, space), 5.0);
    const AgentState p{{0.0, 0.0}, MixedStrategy::dirac(2, 0)}, q{{0.0, 0.0}, MixedStrategy::dirac(2, 1)};
    EXPECT_NEAR(d_C(p, q, space), 2.0 / 3.0, 1e-12);
}

TEST(W1, TrivialCases) {
    const auto model = fixtures::standard_model();
    const Ensemble e = fixtures::standard_ensemble(5, 1);
    EXPECT_NEAR(w1_ensembles(e, e, model.space()).value, 0.0, 1e-15);
    const Ensemble a = fixtures::standard_ensemble(1, 2), b = fixtures::standard_ensemble(1, 3);
    EXPECT_NEAR(w1_ensembles(a, b, model.space()).value, d_C(a.agent(0), b.agent(0), model.space()), 1e-14);
}

TEST(W1, MatchesBruteForceOracle) {
    rng::Engine g(21);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t K = 2 + trial % 3;
        std::vector<std::string> labels;
        std::vector<std::vector<double>> pts;
        for (std::size_t k = 0; k < K; ++k) {
            labels.push_back("u" + std::to_string(k));
            pts.push_back({rng::uniform(g, 0, 1), rng::uniform(g, 0, 1)});
        }
        const auto space = StrategySpace::from_points(labels, pts);
        const auto A = random_ensemble(g, 1 + trial % 4, K, trial % 2 == 0);
        const auto B = random_ensemble(g, 1 + (trial / 4) % 4, K, trial % 3 == 0);
        const auto res = w1_ensembles(A, B, space);
        const double expect = oracle::w1_ensembles(states(A), A.masses(), states(B), B.masses(), to_mat(space.dist()));
        EXPECT_NEAR(res.value, expect, 1e-9);
        EXPECT_LE(res.coupling.marginal_error(A.masses(), B.masses()), 1e-10);
        for (double p : res.coupling.plan.data()) EXPECT_GE(p, 0.0);
        const auto dual = lp::transport_dual(A.masses(), B.masses(), res.cost, res.coupling.plan);
        EXPECT_LE(std::abs(res.value - dual.value), 1e-9);
    }
}

TEST(W1, MetricAxioms) {
    rng::Engine g(4);
    const auto space = StrategySpace::discrete({"a", "b", "c"});
    for (int trial = 0; trial < 30; ++trial) {
        const auto A = random_ensemble(g, 1 + trial % 5, 3, false);
        const auto B = random_ensemble(g, 1 + (trial + 2) % 5, 3, false);
        const auto C = random_ensemble(g, 1 + (trial + 4) % 5, 3, true);
        const double ab = w1_ensembles(A, B, space).value;
        EXPECT_NEAR(ab, w1_ensembles(B, A, space).value, 1e-12);
        EXPECT_LE(ab, w1_ensembles(A, C, space).value + w1_ensembles(C, B, space).value + 1e-9);
        EXPECT_GT(ab, 1e-10);
    }
}

TEST(W1, ZeroOnlyForCoincidingMeasures) {
    const auto space = StrategySpace::discrete({"a", "b"});
    const AgentState y{{0.5}, MixedStrategy({0.3, 0.7})}, z{{1.0}, MixedStrategy::uniform(2)};
    const Ensemble split({y, y, z}, {0.25, 0.25, 0.5});
    const Ensemble merged({y, z}, {0.5, 0.5});
    EXPECT_LE(w1_ensembles(split, merged, space).value, 1e-10);
    const Ensemble m = merge_duplicates(split);
    EXPECT_EQ(m.size(), 2u);
    EXPECT_DOUBLE_EQ(m.mass(0), 0.5);
    const Ensemble other({y, z}, {0.4, 0.6});
    EXPECT_GT(w1_ensembles(other, merged, space).value, 1e-3);
}

TEST(W1, ThreadCountDoesNotChangeValue) {
    const auto model = fixtures::standard_model();
    const Ensemble A = fixtures::standard_ensemble(20, 1), B = fixtures::standard_ensemble(13, 2);
    EXPECT_EQ(w1_ensembles(A, B, model.space(), 1).value, w1_ensembles(A, B, model.space(), 3).value);
}

TEST(CurveDistance, DefinitionAndGrid) {
    const auto model = fixtures::standard_model();
    IntegratorConfig c;
    c.h = 1e-2;
    c.T = 0.5;
    const auto t1 = integrate(fixtures::standard_ensemble(6, 1), c, model);
    const auto t2 = integrate(fixtures::standard_ensemble(6, 2), c, model);
    EXPECT_EQ(curve_distance(t1, t1, 3.0, model.space()), 0.0);
    const auto prof = w1_profile(t1, t2, model.space());
    EXPECT_DOUBLE_EQ(curve_distance(t1, t2, 0.0, model.space()), *std::max_element(prof.begin(), prof.end()));
    const double L = model.ledger().L;
    const double Lp = 2.5 * L;
    // per-time stability envelope
    const double weighted = curve_distance(t1, t2, Lp, model.space());
    double env = 0.0;
    for (std::size_t k = 0; k < prof.size(); ++k) env = std::max(env, std::exp((2 * L - Lp) * t1.times[k]) * prof[0]);
    EXPECT_LE(weighted, env * (1 + 20 * L * c.h));

    c.h = 2e-2;
    const auto t3 = integrate(fixtures::standard_ensemble(6, 2), c, model);
    EXPECT_THROW(curve_distance(t1, t3, 0.0, model.space()), GridMismatch);
}
