#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "shepvi/geometry.hpp"
#include "shepvi/kernels.hpp"
#include "shepvi/problems.hpp"
#include "shepvi/shepard.hpp"
#include "shepvi/solver.hpp"
#include "testutil.hpp"

using namespace shepvi;

namespace {

struct Setup {
  ControlProblem problem;
  NodeSet nodes;
  ShapeFunction shape;
};

Setup linear1d_setup(int k, double sigma) {
  ControlProblem p = make_problem("linear1d", {{"k", k}});
  const BoxDomain box({0.0}, {1.0});
  NodeSet nodes = grid_nodes(box, std::vector<int>{k + 1});
  return {std::move(p), std::move(nodes), ShapeFunction(ShapeKind::wendland42, sigma)};
}

// Shepard extension recomputed from scratch, nothing shared with the
// library's sparse assembly.
double dense_vbar(const ControlProblem& p, const NodeSet& nodes,
                  const ShapeFunction& shape, const std::vector<double>& v,
                  std::span<const double> y) {
  if (in_target(p, y)) return 1.0;
  if (!admissible(p, y)) return 0.0;
  double wsum = 0.0, acc = 0.0;
  for (int i = 0; i < nodes.size(); ++i) {
    double sq = 0.0;
    for (int a = 0; a < nodes.dim(); ++a) {
      const double d = nodes.point(i)[a] - y[a];
      sq += d * d;
    }
    double w = shape(std::sqrt(sq));
    if (shape.kind() == ShapeKind::gaussian && w < ShapeFunction::weight_floor)
      w = 0.0;
    wsum += w;
    acc += w * v[i];
  }
  return wsum > 0.0 ? acc / wsum : 0.0;
}

std::vector<double> dense_bellman(const ControlProblem& p, const NodeSet& nodes,
                                  const ShapeFunction& shape,
                                  const std::vector<double>& v) {
  const int n = nodes.size();
  const int m = static_cast<int>(p.controls.size());
  std::vector<double> out(n);
  std::vector<double> y(p.dim);
  for (int i = 0; i < n; ++i) {
    const auto x = nodes.point(i);
    if (in_target(p, x)) {
      out[i] = 1.0;
      continue;
    }
    double best = 0.0;
    for (int j = 0; j < m; ++j) {
      const auto img = step(p, x, p.controls[j]);
      const double w = std::exp(-cost(p, x, p.controls[j]));
      best = std::max(best, w * dense_vbar(p, nodes, shape, v, img));
    }
    out[i] = best;
  }
  return out;
}

}  // namespace

TEST_CASE("transition assembly records images, weights, and classes") {
  const Setup s = linear1d_setup(16, 8.0);
  const TransitionTable t = assemble_transitions(s.problem, s.nodes, s.shape);
  const int n = s.nodes.size(), m = static_cast<int>(s.problem.controls.size());
  REQUIRE(t.n == n);
  REQUIRE(t.m == m);
  REQUIRE(t.dim == 1);
  REQUIRE(t.images.size() == static_cast<std::size_t>(n) * m);
  REQUIRE(t.image_matrix.rows() == t.interior_count);

  std::int64_t running = 0;
  double expect_bound = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto x = s.nodes.point(i);
    CHECK(static_cast<bool>(t.node_in_target[i]) == in_target(s.problem, x));
    for (int j = 0; j < m; ++j) {
      const std::size_t e = static_cast<std::size_t>(i) * m + j;
      const auto img = step(s.problem, x, s.problem.controls[j]);
      CHECK(t.images[e] == doctest::Approx(img[0]).epsilon(1e-15));
      const double w = std::exp(-cost(s.problem, x, s.problem.controls[j]));
      CHECK(t.weights[e] == doctest::Approx(w).epsilon(1e-15));
      if (!t.node_in_target[i]) expect_bound = std::max(expect_bound, w);

      ImageClass expect = ImageClass::interior;
      if (in_target(s.problem, img))
        expect = ImageClass::target;
      else if (!admissible(s.problem, img))
        expect = ImageClass::outside;
      CHECK(t.image_class[e] == expect);
      if (expect == ImageClass::interior) {
        CHECK(t.interior_row[e] == running);
        ++running;
      } else {
        CHECK(t.interior_row[e] == -1);
      }
    }
  }
  CHECK(running == t.interior_count);
  CHECK(t.contraction_bound == doctest::Approx(expect_bound).epsilon(1e-15));
  CHECK_FALSE(t.degenerate);
}

TEST_CASE("one Bellman sweep equals a dense reimplementation") {
  const Setup s = linear1d_setup(24, 6.0);
  const TransitionTable t = assemble_transitions(s.problem, s.nodes, s.shape);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> v(s.nodes.size());
    for (double& x : v) x = unit(rng);
    const ValueVector got = bellman_apply(t, v);
    const auto want = dense_bellman(s.problem, s.nodes, s.shape, v);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("the Bellman operator is monotone and keeps values in the unit box") {
  const Setup s = linear1d_setup(20, 5.0);
  const TransitionTable t = assemble_transitions(s.problem, s.nodes, s.shape);
  std::mt19937_64 rng(211);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> v(s.nodes.size()), w(s.nodes.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = unit(rng);
      w[i] = v[i] + (1.0 - v[i]) * unit(rng);
    }
    const auto gv = bellman_apply(t, v);
    const auto gw = bellman_apply(t, w);
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(gv[i] >= 0.0);
      CHECK(gv[i] <= 1.0);
      CHECK(gv[i] <= gw[i]);
    }
  }
}

TEST_CASE("iteration from zero is nondecreasing and contracts") {
  const Setup s = linear1d_setup(32, 4.0);
  const TransitionTable t = assemble_transitions(s.problem, s.nodes, s.shape);
  ValueVector v(s.nodes.size(), 0.0);
  double prev_res = -1.0;
  for (int pass = 0; pass < 40; ++pass) {
    const ValueVector next = bellman_apply(t, v);
    double res = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(next[i] >= v[i]);
      res = std::max(res, std::abs(next[i] - v[i]));
    }
    if (prev_res >= 0.0)
      CHECK(res <= t.contraction_bound * prev_res + 1e-12);
    prev_res = res;
    v = next;
  }
}

TEST_CASE("the one dimensional problem converges in two sweeps") {
  // With the zero control available, every node maps straight into the
  // target, so the second sweep reproduces the first and the residual
  // vanishes identically.
  const Setup s = linear1d_setup(64, 1.0 / (2.0 * 0.015625));
  const TransitionTable t = assemble_transitions(s.problem, s.nodes, s.shape);
  auto [v, report] = value_iteration(t, SolverOptions{1e-10, 100});
  CHECK(report.converged);
  CHECK(report.iterations == 2);
  CHECK(report.residuals.back() == 0.0);
  for (int i = 0; i < s.nodes.size(); ++i) {
    const double x = s.nodes.point(i)[0];
    const double expect =
        in_target(s.problem, s.nodes.point(i)) ? 1.0 : std::exp(-0.8 * x);
    CHECK(v[i] == doctest::Approx(expect).epsilon(1e-14));
  }

  auto [v2, r2] = value_iteration(t, ValueVector(v.size(), 0.0),
                                  SolverOptions{1e-10, 100});
  CHECK(std::equal(v.begin(), v.end(), v2.begin()));
  CHECK(r2.iterations == report.iterations);
}

TEST_CASE("value iteration is bitwise deterministic") {
  const Setup s = linear1d_setup(48, 6.0);
  const TransitionTable t1 = assemble_transitions(s.problem, s.nodes, s.shape);
  const TransitionTable t2 = assemble_transitions(s.problem, s.nodes, s.shape);
  const auto [va, ra] = value_iteration(t1, SolverOptions{});
  const auto [vb, rb] = value_iteration(t2, SolverOptions{});
  REQUIRE(va.size() == vb.size());
  for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i] == vb[i]);
  CHECK(ra.iterations == rb.iterations);
}

TEST_CASE("an unreachable target flags the table degenerate") {
  // On the even 30x30 grid no node sits in the target box and the coarse
  // nine-control set cannot steer any image into it within one step.
  const ControlProblem p = make_problem("pendulum", {{"control_step", 32.0}});
  const NodeSet nodes = grid_nodes(p.domain, std::vector<int>{30, 30});
  const ShapeFunction shape(ShapeKind::wendland42, 1.0);
  const TransitionTable t = assemble_transitions(p, nodes, shape);
  CHECK(t.degenerate);
  const auto [v, report] = value_iteration(t, SolverOptions{1e-10, 50});
  CHECK(report.degenerate);
  for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("images nothing covers count as uncovered and evaluate to zero") {
  // Support well below the node spacing: off-node images are uncovered.
  const Setup s = linear1d_setup(10, 1000.0);
  const TransitionTable t = assemble_transitions(s.problem, s.nodes, s.shape);
  CHECK(t.uncovered_interior > 0);
  CHECK(t.uncovered_interior == t.image_matrix.uncovered_count());
}

TEST_CASE("transformed values map back through the floor") {
  const ValueVector vhat = {1.0, std::exp(-1.0), 1e-19, 1e-21, 0.0};
  const auto V = to_value(vhat);
  CHECK(V[0] == 0.0);
  CHECK(V[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::isfinite(V[2]));
  CHECK(std::isinf(V[3]));
  CHECK(std::isinf(V[4]));
  const auto strict = to_value(vhat, 1e-18);
  CHECK(std::isinf(strict[2]));
}
