// spatgame command-line front end.
//
// Exit codes: 0 success, 2 configuration or input error, 3 runtime error,
// 4 experiment failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spatgame/config.hpp"
#include "spatgame/experiments.hpp"
#include "spatgame/io.hpp"
#include "spatgame/transport.hpp"

namespace {

namespace fs = std::filesystem;
using namespace spatgame;

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;
constexpr int exit_experiment = 4;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

void print_ledger(const LipschitzLedger& l, std::ostream& os) {
    os << "L_e       " << io::format_double(l.L_e) << '\n'
       << "L_J       " << io::format_double(l.L_J) << '\n'
       << "diam_U    " << io::format_double(l.diam) << '\n'
       << "L_fx      " << io::format_double(l.L_fx) << '\n'
       << "L_fsigma  " << io::format_double(l.L_fsigma) << '\n'
       << "L         " << io::format_double(l.L) << '\n'
       << "theta_max " << (std::isfinite(l.theta_max) ? io::format_double(l.theta_max) : std::string("inf")) << '\n';
}

fs::path out_dir(const Common& c, const RunConfig& rc) { return c.out.empty() ? fs::path(rc.output.dir) : fs::path(c.out); }

int cmd_simulate(const Common& c) {
    const RunConfig rc = load_run_config(c.config, c.seed);
    const auto result = io::run_simulation(rc, c.threads);
    const fs::path dir = out_dir(c, rc);
    io::write_file(dir / (rc.output.prefix + ".csv"), result.csv);
    io::write_file(dir / (rc.output.prefix + ".meta.json"), result.metadata.dump(2) + "\n");
    print_ledger(rc.model.ledger(), std::cout);
    const auto& d = result.trajectory.diagnostics;
    std::cout << "steps " << d.steps << "  stored " << result.trajectory.size() << "  clamp_events "
              << d.clamp_events << "  max_tv_speed_ratio " << io::format_double(d.max_tv_speed_ratio) << '\n'
              << "wrote " << (dir / (rc.output.prefix + ".csv")).string() << '\n';
    return 0;
}

int cmd_experiment(const Common& c, const std::string& name) {
    if (!is_experiment_name(name)) {
        std::cerr << "error: unknown experiment '" << name << "'\n";
        return exit_config;
    }
    const RunConfig rc = load_run_config(c.config, c.seed);
    const auto report = run_named_experiment(name, rc, c.threads);
    const fs::path dir = out_dir(c, rc);
    io::write_file(dir / (name + ".report.json"), verify::to_json(report).dump(2) + "\n");
    io::write_file(dir / (name + ".summary.csv"), io::report_summary_csv(report));
    for (const auto& q : report.quantities) std::cout << q.name << " = " << io::format_double(q.value) << '\n';
    for (const auto& f : report.failed_checks) std::cout << "FAILED: " << f << '\n';
    std::cout << (report.pass ? "PASS " : "FAIL ") << name << " (" << report.runtime_s << " s)\n";
    return report.pass ? 0 : exit_experiment;
}

int cmd_transport(const Common& c, const std::string& a_path, const std::string& b_path, double t) {
    const RunConfig rc = load_run_config(c.config, c.seed);
    const Trajectory A = io::load_trajectory(a_path);
    const Trajectory B = io::load_trajectory(b_path);
    const Ensemble& ea = A.states[io::find_time(A, t)];
    const Ensemble& eb = B.states[io::find_time(B, t)];
    if (ea.dim() != rc.model.dim() || ea.strategies() != rc.model.strategies() || eb.dim() != rc.model.dim() ||
        eb.strategies() != rc.model.strategies()) {
        throw ConfigError("trajectory files do not match the configured state space");
    }
    const auto res = w1_ensembles(ea, eb, rc.model.space(), c.threads);
    const fs::path dir = c.out.empty() ? fs::path(rc.output.dir) : fs::path(c.out);
    io::write_file(dir / "coupling.csv", io::coupling_csv(res.coupling));
    std::cout << io::format_double(res.value) << '\n';
    return 0;
}

int cmd_ledger(const Common& c) {
    const RunConfig rc = load_run_config(c.config, c.seed);
    print_ledger(rc.model.ledger(), std::cout);
    return 0;
}

void add_common(CLI::App* sub, Common& c, bool needs_out = true) {
    sub->add_option("--config", c.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    if (needs_out) sub->add_option("--out", c.out, "output directory (default: output.dir of the config)");
    sub->add_option("--seed", c.seed, "override the top-level seed");
    sub->add_option("--threads", c.threads, "worker threads, 0 = all cores; never changes results");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spatgame: spatially extended evolutionary game dynamics"};
    app.require_subcommand(1);
    Common common;

    auto* sim = app.add_subcommand("simulate", "integrate a configured ensemble and write the trajectory");
    add_common(sim, common);

    std::string exp_name;
    auto* exp = app.add_subcommand("experiment", "run a verification experiment");
    exp->add_option("name", exp_name, "stability, converge-n, converge-h, eulerian, folk, flow-lipschitz or picard")
        ->required();
    add_common(exp, common);

    std::string a_path, b_path;
    double time = 0.0;
    auto* tr = app.add_subcommand("transport", "exact W1 between two stored ensembles");
    tr->add_option("--a", a_path, "first trajectory CSV")->required()->check(CLI::ExistingFile);
    tr->add_option("--b", b_path, "second trajectory CSV")->required()->check(CLI::ExistingFile);
    tr->add_option("--time", time, "stored time to compare")->required();
    add_common(tr, common);

    auto* led = app.add_subcommand("ledger", "print the Lipschitz ledger of a model");
    add_common(led, common, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    try {
        if (*sim) return cmd_simulate(common);
        if (*exp) return cmd_experiment(common, exp_name);
        if (*tr) return cmd_transport(common, a_path, b_path, time);
        return cmd_ledger(common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const GridMismatch& e) {
        std::cerr << "grid mismatch: " << e.what() << '\n';
        return exit_config;
    } catch (const Error& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return exit_runtime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
}
