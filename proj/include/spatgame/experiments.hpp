#pragma once

// Named experiments driven by a RunConfig. Per-experiment parameters live
// under config.experiment.<name>; unknown keys are errors.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spatgame/config.hpp"
#include "spatgame/verify.hpp"

namespace spatgame {

inline constexpr std::array<std::string_view, 7> experiment_names = {
    "stability", "converge-n", "converge-h", "eulerian", "folk", "flow-lipschitz", "picard"};

inline bool is_experiment_name(std::string_view name) {
    for (auto n : experiment_names)
        if (n == name) return true;
    return false;
}

namespace detail {

inline json experiment_params(const RunConfig& rc, const std::string& name, std::initializer_list<const char*> keys) {
    for (auto it = rc.experiment.begin(); it != rc.experiment.end(); ++it) {
        if (!is_experiment_name(it.key())) throw ConfigError("experiment: unknown experiment '" + it.key() + "'");
    }
    if (!rc.experiment.contains(name)) return json::object();
    const json& p = rc.experiment.at(name);
    cfg::check_keys(p, keys, "experiment." + name);
    return p;
}

inline double param(const json& p, const char* key, double fallback, const std::string& where) {
    return p.contains(key) ? cfg::number(p.at(key), where + "." + key) : fallback;
}

inline std::size_t count_param(const json& p, const char* key, std::size_t fallback, const std::string& where) {
    if (!p.contains(key)) return fallback;
    const json& v = p.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) throw ConfigError(where + "." + key + ": expected a positive integer");
    return static_cast<std::size_t>(v.get<long long>());
}

} // namespace detail

inline verify::ExperimentReport run_named_experiment(const std::string& name, const RunConfig& rc, unsigned threads) {
    if (!is_experiment_name(name)) throw ConfigError("unknown experiment '" + name + "'");
    const std::string where = "experiment." + name;
    IntegratorConfig cfg = rc.integrator_for_run(threads);
    const GameModel& model = rc.model;
    verify::ExperimentReport report;

    if (name == "stability") {
        const json p = detail::experiment_params(rc, name, {"perturbation"});
        const double delta = detail::param(p, "perturbation", 0.05, where);
        const Ensemble A = rc.initial_ensemble();
        const Ensemble B = verify::perturb_positions(A, delta, derive_seed(rc.seed, SeedPurpose::experiment, 0));
        report = verify::stability_experiment(A, B, cfg, model);
        report.config_echo["perturbation"] = delta;
    } else if (name == "converge-n") {
        const json p = detail::experiment_params(rc, name, {"n_list", "seeds", "snapshots"});
        if (!rc.sampler) throw ConfigError("converge-n needs an initial sampler, not an explicit agent list");
        std::vector<std::size_t> n_list = {8, 16, 32, 64};
        if (p.contains("n_list")) {
            n_list.clear();
            for (double v : cfg::vector(p.at("n_list"), where + ".n_list")) {
                if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(where + ".n_list: expected positive integers");
                n_list.push_back(static_cast<std::size_t>(v));
            }
        }
        const std::size_t n_seeds = detail::count_param(p, "seeds", 16, where);
        std::vector<std::uint64_t> seeds;
        for (std::size_t s = 0; s < n_seeds; ++s) seeds.push_back(derive_seed(rc.seed, SeedPurpose::experiment, 100 + s));
        report = verify::n_convergence_experiment(*rc.sampler, n_list, cfg, model, seeds,
                                                  detail::count_param(p, "snapshots", 10, where));
    } else if (name == "converge-h") {
        const json p = detail::experiment_params(rc, name, {"h_list", "reference_h", "check_points"});
        std::vector<double> h_list = {4e-3, 2e-3};
        if (p.contains("h_list")) h_list = cfg::vector(p.at("h_list"), where + ".h_list");
        report = verify::h_convergence_experiment(rc.initial_ensemble(), h_list,
                                                  detail::param(p, "reference_h", 1e-5, where), cfg, model,
                                                  detail::count_param(p, "check_points", 10, where));
    } else if (name == "eulerian") {
        detail::experiment_params(rc, name, {});
        report = verify::eulerian_residual_experiment(rc.initial_ensemble(), cfg, model,
                                                      verify::standard_test_battery(model.strategies()));
    } else if (name == "folk") {
        const json p = detail::experiment_params(rc, name, {"T_rps", "T_dominated"});
        verify::FolkOptions opt;
        opt.h = cfg.h;
        opt.T_pd = cfg.T;
        opt.T_rps = detail::param(p, "T_rps", opt.T_rps, where);
        opt.T_dominated = detail::param(p, "T_dominated", opt.T_dominated, where);
        const Ensemble e = rc.initial_ensemble();
        if (e.size() != 1) throw ConfigError("folk: the initial ensemble must be a single agent");
        report = verify::folk_theorem_suite(opt, model, e.agent(0).sigma);
    } else if (name == "flow-lipschitz") {
        const json p = detail::experiment_params(rc, name, {"probe_pairs", "probe_offset"});
        IntegratorConfig c = cfg;
        c.stride = 1;
        const Ensemble e0 = rc.initial_ensemble();
        const Trajectory background = integrate(e0, c, model);
        const auto probes = verify::make_probe_pairs(e0, detail::count_param(p, "probe_pairs", 32, where),
                                                     detail::param(p, "probe_offset", 0.05, where),
                                                     derive_seed(rc.seed, SeedPurpose::experiment, 1));
        report = verify::flow_lipschitz_experiment(background, model, probes, cfg.threads);
    } else { // picard
        const json p = detail::experiment_params(rc, name, {"tol", "max_iters", "weight_factor"});
        PicardOptions opts;
        opts.tol = detail::param(p, "tol", opts.tol, where);
        opts.max_iters = detail::count_param(p, "max_iters", opts.max_iters, where);
        opts.weight_factor = detail::param(p, "weight_factor", opts.weight_factor, where);
        report = verify::picard_experiment(rc.initial_ensemble(), cfg, model, opts);
    }
    report.config_echo["config"] = rc.source;
    return report;
}

} // namespace spatgame
