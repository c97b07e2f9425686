// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fails.
// Tolerances and runtime budgets are pinned here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "oracle.hpp"
#include "spatgame/config.hpp"
#include "spatgame/experiments.hpp"
#include "spatgame/fixtures.hpp"
#include "spatgame/io.hpp"
#include "spatgame/verify.hpp"

using namespace spatgame;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

const unsigned threads = std::max(1u, std::thread::hardware_concurrency());

std::string cfg_path(const char* name) { return std::string(SPATGAME_SOURCE_DIR) + "/configs/" + name; }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

oracle::Mat to_mat(const lp::Matrix& m) {
    oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

StrategySpace random_space(rng::Engine& g, std::size_t K) {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> pts;
    const std::size_t dim = 1 + K % 3;
    for (std::size_t k = 0; k < K; ++k) {
        labels.push_back("u" + std::to_string(k));
        std::vector<double> p(dim);
        for (double& c : p) c = rng::uniform(g, -1.5, 1.5);
        pts.push_back(std::move(p));
    }
    return StrategySpace::from_points(labels, pts);
}

MixedStrategy random_strategy(rng::Engine& g, std::size_t K) {
    // sparse draws now and then so that vertices of the simplex get exercised
    std::vector<double> w = rng::dirichlet(g, std::vector<double>(K, 0.7));
    if (rng::uniform01(g) < 0.2) {
        w.assign(K, 0.0);
        w[static_cast<std::size_t>(rng::uniform01(g) * static_cast<double>(K)) % K] = 1.0;
    }
    return MixedStrategy::from_step(std::move(w));
}

template <class M>
std::vector<double> weights(const M& s) {
    return {s.weights().begin(), s.weights().end()};
}

Outcome norm_equivalence() {
    rng::Engine g(derive_seed(fixtures::standard_seed, SeedPurpose::experiment, 1001));
    const double tol = 1e-9;
    int bad = 0;
    double worst = -1e300;
    for (int t = 0; t < 200; ++t) {
        const std::size_t K = 2 + static_cast<std::size_t>(t % 5); // 2..6
        const auto space = random_space(g, K);
        const auto mu = random_strategy(g, K), nu = random_strategy(g, K);
        const double bl = bl_norm(mu - nu, space), w1 = w1_on_U(mu, nu, space), tv = tv_norm(mu - nu);
        const double D = space.radius();
        const double m = std::max({bl - w1, w1 - (1 + D) * bl, w1 - D * tv});
        worst = std::max(worst, m);
        if (m > tol) ++bad;
    }
    return {bad == 0, fmt("violations %.0f, worst margin %.3g", bad, worst)};
}

Outcome oracle_equivalence() {
    rng::Engine g(derive_seed(fixtures::standard_seed, SeedPurpose::experiment, 1002));
    const double tol = 1e-9;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t K = 2 + static_cast<std::size_t>(t % 3); // 2..4
        const auto space = random_space(g, K);
        const auto D = to_mat(space.dist());
        const auto mu = random_strategy(g, K), nu = random_strategy(g, K);
        worst = std::max(worst, std::abs(bl_norm(mu - nu, space) - oracle::bl_norm(weights(mu - nu), D)));
        worst = std::max(worst, std::abs(w1_on_U(mu, nu, space) - oracle::transport(weights(mu), weights(nu), D)));

        auto draw = [&](std::size_t n) {
            std::vector<AgentState> agents;
            for (std::size_t a = 0; a < n; ++a)
                agents.push_back({{rng::uniform(g, -1, 1), rng::uniform(g, -1, 1)}, random_strategy(g, K)});
            return Ensemble(std::move(agents), rng::dirichlet(g, std::vector<double>(n, 1.0)));
        };
        const Ensemble A = draw(1 + static_cast<std::size_t>(t % 4)), B = draw(1 + static_cast<std::size_t>((t / 4) % 4));
        std::vector<oracle::State> sa, sb;
        for (const auto& y : A.agents()) sa.push_back({y.x, weights(y.sigma)});
        for (const auto& y : B.agents()) sb.push_back({y.x, weights(y.sigma)});
        worst = std::max(worst, std::abs(w1_ensembles(A, B, space).value - oracle::w1_ensembles(sa, A.masses(), sb, B.masses(), D)));
    }
    return {worst <= tol, fmt("max |impl - oracle| = %.3g over 100 instances", worst)};
}

Outcome simplex_preservation() {
    const GameModel model = fixtures::standard_model();
    IntegratorConfig c = fixtures::standard_integrator();
    c.h = 0.5 * model.ledger().theta_max;
    c.T = 2000 * c.h;
    c.stride = 1;
    const Trajectory traj = integrate(fixtures::standard_ensemble(), c, model);
    double worst_sum = 0.0, min_w = 1.0;
    for (const auto& e : traj.states)
        for (const auto& y : e.agents()) {
            double s = 0.0;
            for (double w : y.sigma.weights()) {
                s += w;
                min_w = std::min(min_w, w);
            }
            worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        }
    // clamps only ever absorb negatives of size <= 1e-12; anything larger throws
    const bool ok = traj.diagnostics.steps == 2000 && worst_sum <= 1e-9 && min_w >= 0.0;
    return {ok, fmt("steps %.0f, max |sum sigma - 1| = %.3g, roundoff clamps %.0f", static_cast<double>(traj.diagnostics.steps),
                    worst_sum, static_cast<double>(traj.diagnostics.clamp_events))};
}

Outcome from_report(const verify::ExperimentReport& r, const std::string& detail) {
    std::string d = detail;
    for (const auto& f : r.failed_checks) d += "; FAILED: " + f;
    return {r.pass, d};
}

Outcome stability() {
    const auto rc = load_run_config(cfg_path("standard.json"));
    const auto r = run_named_experiment("stability", rc, threads);
    return from_report(r, fmt("W1_0 = %.4g, worst ratio %.6f (bound %.6f)", r.get("w1_initial"), r.get("worst_ratio"),
                              r.get("ratio_bound")));
}

Outcome tv_speed() {
    const GameModel model = fixtures::standard_model();
    IntegratorConfig c = fixtures::standard_integrator();
    c.stride = 1;
    const Trajectory traj = integrate(fixtures::standard_ensemble(), c, model);
    const auto& led = model.ledger();
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        const double h = traj.times[k + 1] - traj.times[k];
        const double bound = h * led.L_J * led.diam * (1.0 + 10.0 * led.L * h);
        for (std::size_t a = 0; a < traj.states[k].size(); ++a) {
            const double tv = tv_norm(traj.states[k + 1].agent(a).sigma - traj.states[k].agent(a).sigma);
            worst = std::max(worst, tv / bound);
        }
    }
    return {worst <= 1.0, fmt("max per-step TV / bound = %.4f", worst)};
}

Outcome flow_lipschitz() {
    const auto rc = load_run_config(cfg_path("standard.json"));
    const auto r = run_named_experiment("flow-lipschitz", rc, threads);
    return from_report(r, fmt("%.0f probes, worst ratio %.6f (bound %.6f)", r.get("probe_pairs"), r.get("worst_ratio"),
                              r.get("ratio_bound")));
}

Outcome picard() {
    const auto rc = load_run_config(cfg_path("picard.json"));
    const auto r = run_named_experiment("picard", rc, threads);
    if (!r.has("contraction_factor")) return from_report(r, "no convergence");
    return from_report(r, fmt("factor %.4f (bound %.4f), sup-W1 gap %.3g", r.get("contraction_factor"),
                              r.get("contraction_bound"), r.get("sup_w1_vs_integrate")));
}

Outcome orders() {
    const auto e = load_run_config(cfg_path("standard.json"));
    const auto h = load_run_config(cfg_path("heun.json"));
    const auto re = run_named_experiment("converge-h", e, threads);
    const auto rh = run_named_experiment("converge-h", h, threads);
    const std::string key = "ratio(0.004/0.002)";
    Outcome o = from_report(re, fmt("euler ratio %.4f, heun ratio %.4f", re.get(key), rh.get(key)));
    for (const auto& f : rh.failed_checks) o.detail += "; FAILED (heun): " + f;
    o.ok = re.pass && rh.pass;
    return o;
}

Outcome folk() {
    const auto rc = load_run_config(cfg_path("pd.json"));
    const auto r = run_named_experiment("folk", rc, threads);
    return from_report(r, fmt("RPS drift %.3g/unit time, PD TV %.3g, dominated mass %.3g", r.get("rps.drift_per_unit_time"),
                              r.get("pd.tv_to_defect"), r.get("dominated.mass")));
}

Outcome eulerian() {
    const auto rc = load_run_config(cfg_path("standard.json"));
    const auto r = run_named_experiment("eulerian", rc, threads);
    std::string d;
    for (const auto& q : r.quantities)
        if (q.name.size() > 8 && q.name.substr(q.name.size() - 8) == ".C_ratio") d += q.name + " " + io::format_double(q.value) + "  ";
    return from_report(r, d.empty() ? "all residuals trivial" : d);
}

Outcome n_convergence() {
    const auto rc = load_run_config(cfg_path("standard.json"));
    const auto r = run_named_experiment("converge-n", rc, threads);
    std::string d = "medians";
    for (const auto& q : r.quantities)
        if (q.name.rfind("median_", 0) == 0) d += " " + io::format_double(q.value);
    d += fmt(", worst chain ratio %.6f", r.get("worst_chain_ratio"));
    return from_report(r, d);
}

Outcome belief_update() {
    const GameModel model = fixtures::standard_model();
    const auto r = verify::belief_update_consistency(fixtures::standard_ensemble(), 1e-4, model, 100000,
                                                     derive_seed(fixtures::standard_seed, SeedPurpose::experiment, 2),
                                                     threads);
    return from_report(r, fmt("worst |z| = %.3f over %.0f components", r.get("worst_z"), r.get("components")));
}

Outcome reproducibility() {
    bool ok = true;
    std::string d;
    for (const char* name : {"standard.json", "belief_update.json"}) {
        const auto rc = load_run_config(cfg_path(name));
        const auto a = io::run_simulation(rc, 1);
        const auto b = io::run_simulation(rc, 4);
        const auto c = io::run_simulation(rc, 4);
        const bool same = a.csv == b.csv && b.csv == c.csv && a.metadata.dump() == b.metadata.dump() &&
                          b.metadata.dump() == c.metadata.dump();
        ok = ok && same;
        d += std::string(name) + (same ? " identical (" : " DIFFERS (") + std::to_string(a.csv.size()) + " bytes)  ";
    }
    return {ok, d};
}

struct Criterion {
    const char* label;
    double budget_s;
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"norm equivalence, 200 pairs", 10, norm_equivalence},
        {"OT oracle equivalence", 30, oracle_equivalence},
        {"simplex preservation at h = theta_max/2", 5, simplex_preservation},
        {"stability bound", 60, stability},
        {"TV speed bound", 5, tv_speed},
        {"flow Lipschitz bound", 30, flow_lipschitz},
        {"Picard contraction", 120, picard},
        {"Euler and Heun order", 120, orders},
        {"folk-theorem sanity", 30, folk},
        {"Eulerian residual", 30, eulerian},
        {"N -> infinity", 300, n_convergence},
        {"stochastic scheme consistency", 60, belief_update},
        {"reproducibility", 10, reproducibility},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = s < c.budget_s;
        const bool pass = o.ok && in_time;
        if (!pass) ++failures;
        std::printf("[%s] %2zu %-42s %7.2f s / %3.0f s  %s%s\n", pass ? "PASS" : "FAIL", i + 1, c.label, s, c.budget_s,
                    o.detail.c_str(), in_time ? "" : "  (over budget)");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
