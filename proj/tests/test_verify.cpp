#include <gtest/gtest.h>

#include <vector>

#include "oracle.hpp"
#include "spatgame/fixtures.hpp"
#include "spatgame/verify.hpp"

using namespace spatgame;

namespace {

GameModel frozen() {
    return GameModel(StrategySpace::discrete({"a", "b", "c"}), 2, PayoffFamily{lp::Matrix(3, 3), {}},
                     VelocityFamily{lp::Matrix(3, 2), 0.0}, 100.0);
}

GameModel constant_drift() {
    lp::Matrix V(3, 2);
    V(0, 0) = 0.3;
    V(1, 1) = 0.2;
    V(2, 0) = -0.1;
    return GameModel(StrategySpace::discrete({"a", "b", "c"}), 2, PayoffFamily{lp::Matrix(3, 3), {}}, VelocityFamily{V, 0.0},
                     100.0);
}

IntegratorConfig grid(double h, double T) {
    IntegratorConfig c;
    c.h = h;
    c.T = T;
    return c;
}

} // namespace

TEST(Report, PassIsConjunctionOfChecks) {
    verify::ExperimentReport r;
    r.name = "x";
    r.set("a", 1.0);
    r.set("a", 2.0);
    EXPECT_EQ(r.quantities.size(), 1u);
    EXPECT_EQ(r.get("a"), 2.0);
    EXPECT_THROW(r.get("b"), ConfigError);
    r.check("ok", true);
    EXPECT_TRUE(r.pass);
    r.check("bad", false);
    EXPECT_FALSE(r.pass);
    const auto j = verify::to_json(r);
    EXPECT_EQ(j["failed_checks"][0], "bad");
}

TEST(Stability, IdenticalEnsemblesGiveZero) {
    const auto model = fixtures::standard_model();
    const Ensemble e = fixtures::standard_ensemble(6, 1);
    const auto r = verify::stability_experiment(e, e, grid(1e-2, 0.5), model);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.get("w1_max"), 0.0);
}

TEST(Stability, FrozenDynamicsKeepsDistance) {
    const auto model = frozen();
    const Ensemble e = fixtures::standard_ensemble(6, 1);
    const auto r = verify::stability_experiment(e, verify::perturb_positions(e, 0.1, 3), grid(1e-2, 0.5), model);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.get("w1_final"), r.get("w1_initial"), 1e-12);
    EXPECT_LE(r.get("worst_ratio"), 1.0 + 1e-12);
}

TEST(Stability, UnderstatedLedgerIsCaughtByTheIntegrator) {
    // L_J = 0 claims strategies never move; the per-step TV guard must object
    const auto base = fixtures::standard_model();
    LipschitzOverrides ov;
    ov.L_e = 0.0;
    ov.L_J = 0.0;
    const GameModel lying(base.space(), 2, base.payoff_family(), base.velocity_family(), 100.0, ov);
    const Ensemble A = fixtures::standard_ensemble(4, 1);
    EXPECT_THROW(verify::stability_experiment(A, verify::perturb_positions(A, 0.05, 2), grid(1e-2, 0.5), lying),
                 InvariantViolation);
}

TEST(NConvergence, DegenerateDistribution) {
    const auto model = fixtures::standard_model();
    SamplerSpec s;
    s.position = PositionKind::uniform_box;
    s.lo = {0.5, 0.5};
    s.hi = {0.5, 0.5};
    s.strategy = StrategyKind::vertex_mixture;
    s.weights = {0.0, 1.0, 0.0};
    const auto r = verify::n_convergence_experiment(s, {2, 4, 8}, grid(1e-2, 0.5), model, {1, 2, 3});
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.get("degenerate"), 1.0);
}

TEST(NConvergence, ValidatesInputs) {
    const auto model = fixtures::standard_model();
    const auto s = fixtures::standard_sampler();
    EXPECT_THROW(verify::n_convergence_experiment(s, {8}, grid(1e-2, 0.5), model, {1}), ConfigError);
    EXPECT_THROW(verify::n_convergence_experiment(s, {8, 4}, grid(1e-2, 0.5), model, {1}), ConfigError);
    EXPECT_THROW(verify::n_convergence_experiment(s, {4, 8}, grid(1e-2, 0.5), model, {}), ConfigError);
}

TEST(HConvergence, ExactForConstantFields) {
    const auto model = constant_drift();
    const Ensemble e = fixtures::standard_ensemble(5, 1);
    const auto r = verify::h_convergence_experiment(e, {0.04, 0.02, 0.01}, 1e-3, grid(0.01, 0.4), model, 5);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.get("exact"), 1.0);
}

TEST(HConvergence, ValidatesSequence) {
    const auto model = fixtures::standard_model();
    const Ensemble e = fixtures::standard_ensemble(4, 1);
    EXPECT_THROW(verify::h_convergence_experiment(e, {0.04, 0.03}, 1e-3, grid(0.01, 0.4), model, 5), ConfigError);
    EXPECT_THROW(verify::h_convergence_experiment(e, {0.04, 0.02}, 0.02, grid(0.01, 0.4), model, 5), ConfigError);
    EXPECT_THROW(verify::h_convergence_experiment(e, {0.03, 0.015}, 1e-3, grid(0.01, 0.4), model, 7), ConfigError);
}

TEST(Eulerian, TrivialFunctionsVanish) {
    const auto model = fixtures::standard_model();
    IntegratorConfig c = grid(1e-3, 0.5);
    c.stride = 1;
    const auto traj = integrate(fixtures::standard_ensemble(), c, model);
    const auto battery = verify::standard_test_battery(3);
    EXPECT_EQ(verify::eulerian_residual(traj, model, battery[0]).summed, 0.0);
    EXPECT_LE(verify::eulerian_residual(traj, model, battery[1]).summed, 1e-12);
    EXPECT_GT(verify::eulerian_residual(traj, model, battery[2]).summed, 0.0);
}

TEST(Eulerian, ExperimentPassesOnFixture) {
    const auto model = fixtures::standard_model();
    const auto r = verify::eulerian_residual_experiment(fixtures::standard_ensemble(), grid(2e-3, 0.5), model,
                                                        verify::standard_test_battery(3));
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.get("s_squared.C_ratio"), 1.0, 0.1);
}

TEST(Folk, SuiteMatchesReplicatorOracle) {
    const auto r = verify::folk_theorem_suite();
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.get("rps.drift_per_unit_time"), 1e-8);
    // the dominated strategy follows the exact decay ratio sigma_c / sigma_a = e^{-t}
    const auto model = fixtures::dominated_game();
    oracle::Mat A(3, oracle::Vec(3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) A[i][j] = model.payoff_family().matrix(i, j);
    const auto ref = oracle::replicator_rk4(A, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 10.0, 1e-3);
    EXPECT_NEAR(ref[2] / ref[0], std::exp(-10.0), 1e-9);
    const auto run = verify::homogeneous_run(model, MixedStrategy::uniform(3), 1e-3, 10.0);
    const auto& s = run.back().agent(0).sigma;
    EXPECT_NEAR(s[2] / s[0], std::exp(-10.0), 1e-6);
}

TEST(Folk, RejectsNonDilemma) {
    EXPECT_THROW(verify::folk_theorem_suite({}, fixtures::homogeneous_model(lp::Matrix(2, 2), {"C", "D"})), ConfigError);
}

TEST(FlowLipschitz, TrivialCases) {
    const auto model = fixtures::standard_model();
    IntegratorConfig c = grid(1e-2, 0.5);
    const auto e = fixtures::standard_ensemble(8, 1);
    const auto bg = integrate(e, c, model);
    std::vector<verify::ProbePair> same = {{e.agent(0), e.agent(0)}};
    const auto r = verify::flow_lipschitz_experiment(bg, model, same);
    EXPECT_TRUE(r.pass);

    const auto fm = frozen();
    const auto fbg = integrate(e, c, fm);
    const auto probes = verify::make_probe_pairs(e, 8, 0.05, 3);
    const auto rf = verify::flow_lipschitz_experiment(fbg, fm, probes);
    EXPECT_TRUE(rf.pass);
    EXPECT_NEAR(rf.get("worst_ratio"), 1.0, 1e-12);
}

TEST(Picard, ExperimentOnSmallInstance) {
    const auto model = fixtures::standard_model();
    const auto r = verify::picard_experiment(fixtures::standard_ensemble(8), grid(1e-2, 0.5), model);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.get("contraction_factor"), 2.0 / 3.0 + 0.1);
    EXPECT_EQ(verify::contraction_factor({1.0, 0.5, 1e-10, 1e-11}), 0.5);
}

TEST(BeliefUpdate, ConsistencySmallRun) {
    const auto model = fixtures::standard_model();
    const auto r = verify::belief_update_consistency(fixtures::standard_ensemble(4), 1e-3, model, 20000, 5, 2);
    EXPECT_TRUE(r.pass) << r.get("worst_z");
    EXPECT_LE(r.get("worst_sigma_gap"), 1e-12);
    const auto again = verify::belief_update_consistency(fixtures::standard_ensemble(4), 1e-3, model, 20000, 5, 1);
    EXPECT_EQ(again.get("worst_z"), r.get("worst_z"));
}
