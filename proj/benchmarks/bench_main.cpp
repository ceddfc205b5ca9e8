#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "shepvi/config.hpp"
#include "shepvi/geometry.hpp"
#include "shepvi/kernels.hpp"
#include "shepvi/problems.hpp"
#include "shepvi/shepard.hpp"
#include "shepvi/solver.hpp"

namespace {

using namespace shepvi;

std::vector<double> random_points(std::mt19937_64& rng, int count, int dim,
                                  double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> pts(static_cast<std::size_t>(count) * dim);
  for (double& x : pts) x = dist(rng);
  return pts;
}

void BM_RadiusNeighbors(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  const auto a = random_points(rng, n, 2, 0.0, 1.0);
  const auto b = random_points(rng, n, 2, 0.0, 1.0);
  const double radius = 2.0 / std::sqrt(static_cast<double>(n));
  for (auto _ : state) {
    auto pairs = radius_neighbors(a, n, b, n, 2, radius);
    benchmark::DoNotOptimize(pairs.offsets.data());
  }
}
BENCHMARK(BM_RadiusNeighbors)->Arg(2000)->Arg(10000);

void BM_ShepardAssembly(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const NodeSet nodes = grid_nodes(BoxDomain({0.0, 0.0}, {1.0, 1.0}),
                                   std::vector<int>{side, side});
  const ShapeFunction shape(ShapeKind::wendland42,
                            sigma_from_overlap(nodes, 20));
  std::mt19937_64 rng(11);
  const int q = 4 * side * side;
  const auto points = random_points(rng, q, 2, 0.0, 1.0);
  for (auto _ : state) {
    const ShepardMatrix m = shepard_matrix(nodes, shape, points, q);
    benchmark::DoNotOptimize(m.values().data());
  }
  state.SetItemsProcessed(state.iterations() * q);
}
BENCHMARK(BM_ShepardAssembly)->Arg(32)->Arg(64);

void BM_ShepardApply(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const NodeSet nodes = grid_nodes(BoxDomain({0.0, 0.0}, {1.0, 1.0}),
                                   std::vector<int>{side, side});
  const ShapeFunction shape(ShapeKind::wendland42,
                            sigma_from_overlap(nodes, 20));
  std::mt19937_64 rng(13);
  const int q = 4 * side * side;
  const auto points = random_points(rng, q, 2, 0.0, 1.0);
  const ShepardMatrix m = shepard_matrix(nodes, shape, points, q);
  std::vector<double> v(static_cast<std::size_t>(nodes.size()));
  for (double& x : v) x = std::uniform_real_distribution<double>(0, 1)(rng);
  std::vector<double> y(static_cast<std::size_t>(q));
  for (auto _ : state) {
    m.apply(v, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * q);
}
BENCHMARK(BM_ShepardApply)->Arg(32)->Arg(64);

void BM_BellmanApply(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const ControlProblem p = make_problem("pendulum");
  const NodeSet nodes = grid_nodes(p.domain, std::vector<int>{side, side});
  const ShapeFunction shape(ShapeKind::wendland42,
                            sigma_from_overlap(nodes, 20));
  const TransitionTable t = assemble_transitions(p, nodes, shape);
  ValueVector v(static_cast<std::size_t>(t.n), 0.0);
  for (auto _ : state) {
    v = bellman_apply(t, v);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * t.n * t.m);
}
BENCHMARK(BM_BellmanApply)->Arg(30)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
