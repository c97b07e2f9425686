#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "spatgame/io.hpp"

namespace fs = std::filesystem;
using namespace spatgame;

namespace {

const std::string cli = SPATGAME_CLI_PATH;
const std::string src = SPATGAME_SOURCE_DIR;

struct CliRun {
    int code;
    std::string out;
};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "spatgame_cli_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

CliRun run(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "spatgame_cli_test" / "last.log";
    fs::create_directories(log.parent_path());
    const int status = std::system((cli + " " + args + " > " + log.string() + " 2>&1").c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, io::read_file(log.string())};
}

std::string config(const char* name) { return src + "/configs/" + name; }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Cli, Ledger) {
    const auto r = run("ledger --config " + config("standard.json"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("L         8.2\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("theta_max 0.5\n"), std::string::npos) << r.out;
}

TEST(Cli, SimulateWritesTrajectoryAndIsReproducible) {
    const auto d1 = scratch("sim1"), d2 = scratch("sim4");
    ASSERT_EQ(run("simulate --config " + config("standard.json") + " --out " + d1.string() + " --threads 1").code, 0);
    ASSERT_EQ(run("simulate --config " + config("standard.json") + " --out " + d2.string() + " --threads 4").code, 0);
    const std::string csv = io::read_file((d1 / "trajectory.csv").string());
    EXPECT_EQ(lines(csv), 1 + 16 * 1001u);
    EXPECT_EQ(csv, io::read_file((d2 / "trajectory.csv").string()));
    EXPECT_EQ(io::read_file((d1 / "trajectory.meta.json").string()), io::read_file((d2 / "trajectory.meta.json").string()));
}

TEST(Cli, SeedOverrideChangesSample) {
    const auto d1 = scratch("seedA"), d2 = scratch("seedB");
    ASSERT_EQ(run("simulate --config " + config("picard.json") + " --out " + d1.string()).code, 0);
    ASSERT_EQ(run("simulate --config " + config("picard.json") + " --out " + d2.string() + " --seed 5").code, 0);
    EXPECT_NE(io::read_file((d1 / "trajectory.csv").string()), io::read_file((d2 / "trajectory.csv").string()));
}

TEST(Cli, ConfigErrorsExitWithTwo) {
    const auto r = run("simulate --config " + config("too_large_h.json") + " --out " + scratch("bad").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("theta_max"), std::string::npos) << r.out;
    EXPECT_EQ(run("simulate --config /nonexistent.json").code, 2);
    EXPECT_EQ(run("experiment nonsense --config " + config("standard.json")).code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
}

TEST(Cli, TransportBetweenStoredEnsembles) {
    const auto d = scratch("transport");
    ASSERT_EQ(run("simulate --config " + config("picard.json") + " --out " + (d / "a").string()).code, 0);
    ASSERT_EQ(run("simulate --config " + config("picard.json") + " --out " + (d / "b").string() + " --seed 9").code, 0);
    const std::string a = (d / "a" / "trajectory.csv").string(), b = (d / "b" / "trajectory.csv").string();

    auto self = run("transport --config " + config("picard.json") + " --a " + a + " --b " + a + " --time 0.5 --out " +
                    (d / "self").string());
    ASSERT_EQ(self.code, 0) << self.out;
    EXPECT_EQ(io::parse_double(self.out.substr(0, self.out.find('\n')), "w1"), 0.0);

    auto ab = run("transport --config " + config("picard.json") + " --a " + a + " --b " + b + " --time 0 --out " +
                  (d / "ab").string());
    ASSERT_EQ(ab.code, 0) << ab.out;
    EXPECT_GT(io::parse_double(ab.out.substr(0, ab.out.find('\n')), "w1"), 0.0);
    const std::string coupling = io::read_file((d / "ab" / "coupling.csv").string());
    EXPECT_EQ(coupling.substr(0, coupling.find('\n')), "row,col,mass");

    EXPECT_EQ(run("transport --config " + config("picard.json") + " --a " + a + " --b " + b + " --time 0.1234 --out " +
                  (d / "x").string())
                  .code,
              2);
}

TEST(Cli, ExperimentWritesReport) {
    const auto d = scratch("exp");
    const auto r = run("experiment stability --config " + config("picard.json") + " --out " + d.string());
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(d / "stability.report.json"));
    const std::string summary = io::read_file((d / "stability.summary.csv").string());
    EXPECT_NE(summary.find("stability,pass,1"), std::string::npos) << summary;
}
