#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "doctest.h"
#include "shepvi/config.hpp"
#include "shepvi/errors.hpp"
#include "shepvi/geometry.hpp"
#include "testutil.hpp"

using namespace shepvi;
using nlohmann::json;

TEST_CASE("a full configuration parses into typed fields") {
  const json j = {
      {"problem", {{"name", "pendulum"}, {"dt", 0.05}}},
      {"grid", {{"counts", {40, 40}}}},
      {"kernel", {{"type", "gaussian"}, {"sigma", 2.5}}},
      {"solver", {{"tol", 1e-9}, {"max_iter", 321}}},
      {"feedback", {{"eta", 0.9}, {"floor", 1e-18}}},
      {"output", {{"dir", "scratch/out"}}},
      {"seed", 17},
  };
  const RunConfig cfg = parse_config(j);
  CHECK(cfg.problem_name == "pendulum");
  CHECK(cfg.problem_overrides.at("dt") == 0.05);
  CHECK_FALSE(cfg.problem_overrides.contains("name"));
  REQUIRE(cfg.grid_counts.has_value());
  CHECK(*cfg.grid_counts == std::vector<int>{40, 40});
  CHECK(cfg.kernel.kind == ShapeKind::gaussian);
  CHECK(cfg.kernel.sigma == 2.5);
  CHECK_FALSE(cfg.kernel.c_sigma.has_value());
  CHECK(cfg.solver.tol == 1e-9);
  CHECK(cfg.solver.max_iter == 321);
  CHECK(cfg.eta == 0.9);
  CHECK(cfg.floor == 1e-18);
  CHECK(cfg.output_dir == std::filesystem::path("scratch/out"));
  CHECK(cfg.seed == 17);
  CHECK(cfg.canonical.at("kernel").at("type") == "gaussian");
}

TEST_CASE("missing kernel settings fall back to the problem defaults") {
  const RunConfig pend = parse_config({{"problem", {{"name", "pendulum"}}}});
  CHECK(pend.kernel.kind == ShapeKind::wendland42);
  CHECK(pend.kernel.overlap_count == 20);
  CHECK_FALSE(pend.kernel.sigma.has_value());

  const RunConfig lin = parse_config({{"problem", {{"name", "linear1d"}}}});
  CHECK(lin.kernel.c_sigma == 0.1);

  // A user-provided sizing replaces the default sizing entirely.
  const RunConfig sized = parse_config(
      {{"problem", {{"name", "pendulum"}}}, {"kernel", {{"sigma", 3.0}}}});
  CHECK(sized.kernel.sigma == 3.0);
  CHECK_FALSE(sized.kernel.overlap_count.has_value());
}

TEST_CASE("invalid configurations are rejected with config errors") {
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"name", "linear1d"}}},
                                    {"typo_section", 1}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"grid", {{"counts", {4}}}}}), ConfigError);
  CHECK_THROWS_AS(
      parse_config(json{{"problem", {{"name", "linear1d"}}},
                        {"kernel", {{"sigma", 1.0}, {"c_sigma", 2.0}}}}),
      ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"name", "linear1d"}}},
                                    {"feedback", {{"eta", 0.0}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"name", "linear1d"}}},
                                    {"solver", {{"tol", -1.0}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"name", "linear1d"}}},
                                    {"study", {{"reference", "best"}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"problem", {{"name", "linear1d"}}},
                                    {"grid", {{"counts", {0}}}}}),
                  ConfigError);
}

TEST_CASE("set overrides parse JSON values and fall back to strings") {
  json j = {{"problem", {{"name", "linear1d"}}}};
  apply_override(j, "solver.tol=1e-9");
  apply_override(j, "problem.name=pendulum");
  apply_override(j, "grid.counts=[10,10]");
  apply_override(j, "kernel.sigma=7");
  apply_override(j, "output.dir=out/elsewhere");
  CHECK(j.at("solver").at("tol") == 1e-9);
  CHECK(j.at("problem").at("name") == "pendulum");
  CHECK(j.at("grid").at("counts") == json({10, 10}));
  CHECK(j.at("kernel").at("sigma") == 7);
  CHECK(j.at("output").at("dir") == "out/elsewhere");
  CHECK_THROWS_AS(apply_override(j, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "=5"), ConfigError);

  const RunConfig cfg = parse_config(j);
  CHECK(cfg.problem_name == "pendulum");
  CHECK(cfg.kernel.sigma == 7.0);
}

TEST_CASE("overlap sizing matches a direct reimplementation") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 6; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 3);
    const int n = 30 + static_cast<int>(rng() % 120);
    const int k = 1 + static_cast<int>(rng() % 10);
    const NodeSet nodes(testutil::random_points(rng, n, dim, 0.0, 1.0), dim);

    std::vector<double> kth;
    for (int i = 0; i < n; ++i) {
      std::vector<double> d;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double sq = 0.0;
        for (int a = 0; a < dim; ++a) {
          const double diff = nodes.point(i)[a] - nodes.point(j)[a];
          sq += diff * diff;
        }
        d.push_back(sq);
      }
      std::sort(d.begin(), d.end());
      kth.push_back(std::sqrt(d[static_cast<std::size_t>(k - 1)]));
    }
    std::sort(kth.begin(), kth.end());
    const double median = kth[static_cast<std::size_t>((n - 1) / 2)];

    CHECK(sigma_from_overlap(nodes, k) ==
          doctest::Approx(1.0 / median).epsilon(1e-12));
  }
}

TEST_CASE("overlap sizing rejects degenerate requests") {
  const NodeSet nodes({0.0, 0.1, 0.2}, 1);
  CHECK_THROWS_AS(sigma_from_overlap(nodes, 0), ConfigError);
  CHECK_THROWS_AS(sigma_from_overlap(nodes, 3), ConfigError);
  const NodeSet dup({0.5, 0.5, 0.5, 0.5}, 1);
  CHECK_THROWS_AS(sigma_from_overlap(dup, 2), ConfigError);
}

TEST_CASE("shape resolution honors the three sizing modes") {
  const NodeSet nodes = grid_nodes(BoxDomain({0.0}, {1.0}), std::vector<int>{21});
  const double fill = 0.025;

  KernelConfig direct;
  direct.sigma = 5.0;
  CHECK(make_shape(direct, nodes, fill).sigma() == 5.0);

  KernelConfig stationary;
  stationary.c_sigma = 0.1;
  CHECK(make_shape(stationary, nodes, fill).sigma() == doctest::Approx(4.0));

  KernelConfig overlap;
  overlap.overlap_count = 4;
  // On a uniform grid the fourth nearest neighbor sits two spacings away
  // for interior nodes, which dominate the median.
  CHECK(make_shape(overlap, nodes, fill).sigma() ==
        doctest::Approx(1.0 / 0.1).epsilon(1e-12));
}

TEST_CASE("the shipped experiment configurations load") {
  const std::filesystem::path repo(SHEPVI_REPO_DIR);
  for (const char* name :
       {"linear1d.json", "linear1d_study.json", "pendulum.json",
        "pendulum_study.json", "pendulum_compare.json", "magnetic_wheel.json",
        "shortest_path.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(repo / "configs" / name));
  }
  CHECK_THROWS_AS(load_config(repo / "configs" / "no_such.json"), IoError);
}

TEST_CASE("the committed obstacle map equals its generator byte for byte") {
  const std::filesystem::path repo(SHEPVI_REPO_DIR);
  const std::string on_disk =
      testutil::read_file(repo / "configs" / "maps" / "archipelago_64.pgm");
  CHECK(on_disk == testutil::archipelago_p5());
}
