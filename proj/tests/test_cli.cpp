#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "testutil.hpp"

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(SHEPVI_CLI_PATH) + " " + args +
                          " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("exit codes separate usage, config, numeric, and io failures") {
  shepvi::testutil::TempDir tmp;
  const fs::path cfg = tmp.file("run.json");
  const fs::path out = tmp.path() / "out";
  shepvi::testutil::write_file(
      cfg, "{\"problem\": {\"name\": \"linear1d\", \"k\": 8},\n"
           " \"solver\": {\"tol\": 1e-10, \"max_iter\": 50},\n"
           " \"output\": {\"dir\": \"" + out.generic_string() + "\"}}\n");

  SUBCASE("no subcommand is a usage error") { CHECK(run("") == 2); }

  SUBCASE("a successful solve returns zero and writes its tables") {
    CHECK(run("solve --config " + q(cfg)) == 0);
    CHECK(fs::exists(out / "value.csv"));
    CHECK(fs::exists(out / "report.csv"));
  }

  SUBCASE("missing configuration file") {
    CHECK(run("solve --config " + q(tmp.file("absent.json"))) == 4);
  }

  SUBCASE("malformed JSON") {
    const fs::path bad = tmp.file("bad.json");
    shepvi::testutil::write_file(bad, "{\"problem\": \n");
    CHECK(run("solve --config " + q(bad)) == 4);
  }

  SUBCASE("unknown problem name") {
    const fs::path bad = tmp.file("unknown.json");
    shepvi::testutil::write_file(bad, "{\"problem\": {\"name\": \"warp\"}}");
    CHECK(run("solve --config " + q(bad)) == 2);
  }

  SUBCASE("set overrides reach the configuration") {
    CHECK(run("solve --config " + q(cfg) + " --set solver.max_iter=0") == 0);
    CHECK(run("solve --config " + q(cfg) + " --set solver.tol=-1") == 2);
  }

  SUBCASE("simulate validates the start state") {
    CHECK(run("simulate --config " + q(cfg) + " --x0 0.9") == 0);
    CHECK(fs::exists(out / "trajectory.csv"));
    CHECK(run("simulate --config " + q(cfg) + " --x0 abc") == 2);
    CHECK(run("simulate --config " + q(cfg) + " --x0 0.5,0.5") == 2);
    // A start outside the stabilizable set is a numeric failure.
    CHECK(run("simulate --config " + q(cfg) + " --x0 5.0") == 3);
  }

  SUBCASE("residual map") {
    CHECK(run("residual-map --config " + q(cfg)) == 0);
    CHECK(fs::exists(out / "residual.csv"));
  }

  SUBCASE("convergence study needs an ascending size list") {
    CHECK(run("convergence-study --config " + q(cfg) +
              " --set study.k_list=[8,16,32]") == 0);
    CHECK(fs::exists(out / "convergence.csv"));
    CHECK(run("convergence-study --config " + q(cfg) +
              " --set study.k_list=[32,16]") == 2);
    CHECK(run("convergence-study --config " + q(cfg)) == 2);
  }

  SUBCASE("interpolation comparison") {
    CHECK(run("compare-interpolation --config " + q(cfg)) == 0);
    CHECK(fs::exists(out / "compare.csv"));
  }
}
