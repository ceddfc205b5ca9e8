#include "shepvi/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>

#include "shepvi/detail/parallel.hpp"
#include "shepvi/errors.hpp"

namespace shepvi {

TransitionTable assemble_transitions(const ControlProblem& p,
                                     const NodeSet& nodes,
                                     const ShapeFunction& shape) {
  if (nodes.dim() != p.dim) {
    throw ConfigError("node set dimension does not match the problem");
  }
  const int n = nodes.size();
  const int m = static_cast<int>(p.controls.size());
  const int dim = p.dim;
  if (n == 0) throw ConfigError("cannot assemble transitions without nodes");

  for (int i = 0; i < n; ++i) {
    if (!p.domain.contains(nodes.point(i))) {
      throw ConfigError("node " + std::to_string(i) +
                        " lies outside the problem domain");
    }
  }

  TransitionTable t;
  t.n = n;
  t.m = m;
  t.dim = dim;
  const std::int64_t nm = static_cast<std::int64_t>(n) * m;
  t.images.resize(nm * dim);
  t.weights.resize(nm);
  t.image_class.resize(nm);
  t.interior_row.assign(nm, -1);
  t.node_in_target.resize(n);

  for (int i = 0; i < n; ++i) {
    t.node_in_target[i] = p.target.contains(nodes.point(i)) ? 1 : 0;
  }

  // Images, weights and classes in parallel.  A bad stage cost is only
  // flagged here; the offending pair is re-evaluated afterwards so the
  // exception carries a useful message.
  std::atomic<std::int64_t> bad_pair{-1};
  detail::parallel_for(n, [&](std::int64_t ib, std::int64_t ie) {
    std::vector<double> y(dim);
    for (std::int64_t i = ib; i < ie; ++i) {
      const auto x = nodes.point(static_cast<int>(i));
      for (int j = 0; j < m; ++j) {
        const std::int64_t e = i * m + j;
        const auto& u = p.controls[static_cast<std::size_t>(j)];
        p.step_fn(x, u, y);
        if (p.projection == ProjectionMode::clamp) p.domain.clamp(y, y);
        std::copy(y.begin(), y.end(), t.images.begin() + e * dim);

        const double c = p.cost_fn(x, u);
        if (!(c >= 0.0)) {
          std::int64_t expected = -1;
          bad_pair.compare_exchange_strong(expected, e);
        }
        t.weights[e] = std::exp(-c);

        ImageClass cls = ImageClass::interior;
        if (p.target.contains(y)) {
          cls = ImageClass::target;
        } else if (!admissible(p, y)) {
          cls = ImageClass::outside;
        }
        t.image_class[e] = cls;
      }
    }
  });
  if (bad_pair.load() >= 0) {
    const std::int64_t e = bad_pair.load();
    throw NumericError("stage cost is negative or NaN at node " +
                       std::to_string(e / m) + ", control " +
                       std::to_string(e % m));
  }

  // Deterministic row numbering of the interior images, then one Shepard
  // assembly over all of them.
  std::vector<double> interior_coords;
  std::int32_t next_row = 0;
  for (std::int64_t e = 0; e < nm; ++e) {
    if (t.image_class[e] != ImageClass::interior) continue;
    t.interior_row[e] = next_row++;
    interior_coords.insert(interior_coords.end(),
                           t.images.begin() + e * dim,
                           t.images.begin() + (e + 1) * dim);
  }
  t.interior_count = next_row;
  t.image_matrix = shepard_matrix(nodes, shape, interior_coords, next_row);
  t.uncovered_interior = t.image_matrix.uncovered_count();

  double contraction = 0.0;
  bool any_target_node = false;
  bool any_target_image = false;
  for (int i = 0; i < n; ++i) {
    if (t.node_in_target[i]) {
      any_target_node = true;
      continue;
    }
    const std::int64_t base = static_cast<std::int64_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      contraction = std::max(contraction, t.weights[base + j]);
    }
  }
  for (std::int64_t e = 0; e < nm && !any_target_image; ++e) {
    any_target_image = t.image_class[e] == ImageClass::target;
  }
  t.contraction_bound = contraction;
  t.degenerate = !any_target_node && !any_target_image;
  return t;
}

ValueVector bellman_apply(const TransitionTable& t, const ValueVector& v) {
  if (static_cast<int>(v.size()) != t.n) {
    throw NumericError("value vector length does not match the node count");
  }
  const std::vector<double> at_images = t.image_matrix.apply(v);
  ValueVector out(v.size());
  const int m = t.m;
  detail::parallel_for(
      t.n,
      [&](std::int64_t ib, std::int64_t ie) {
        for (std::int64_t i = ib; i < ie; ++i) {
          if (t.node_in_target[static_cast<std::size_t>(i)]) {
            out[static_cast<std::size_t>(i)] = 1.0;
            continue;
          }
          double best = 0.0;
          const std::int64_t base = i * m;
          for (int j = 0; j < m; ++j) {
            const std::int64_t e = base + j;
            double vbar;
            switch (t.image_class[static_cast<std::size_t>(e)]) {
              case ImageClass::target:
                vbar = 1.0;
                break;
              case ImageClass::outside:
                continue;
              default:
                vbar = at_images[static_cast<std::size_t>(
                    t.interior_row[static_cast<std::size_t>(e)])];
            }
            best = std::max(best, t.weights[static_cast<std::size_t>(e)] * vbar);
          }
          out[static_cast<std::size_t>(i)] = best;
        }
      },
      256);
  return out;
}

std::pair<ValueVector, SolveReport> value_iteration(const TransitionTable& t,
                                                    ValueVector v0,
                                                    const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw ConfigError("solver tol must be positive");
  if (opts.max_iter < 0) throw ConfigError("solver max_iter must be >= 0");
  if (static_cast<int>(v0.size()) != t.n) {
    throw NumericError("initial value vector length does not match the nodes");
  }
  for (double x : v0) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw NumericError("initial value vector must lie in [0,1]");
    }
  }

  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  report.contraction_bound = t.contraction_bound;
  report.uncovered_interior = t.uncovered_interior;
  report.degenerate = t.degenerate;

  ValueVector v = std::move(v0);
  for (int it = 0; it < opts.max_iter; ++it) {
    ValueVector next = bellman_apply(t, v);
    double delta = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      delta = std::max(delta, std::fabs(next[i] - v[i]));
    }
    report.residuals.push_back(delta);
    v = std::move(next);
    if (delta <= opts.tol) {
      report.converged = true;
      break;
    }
  }
  report.iterations = static_cast<int>(report.residuals.size());
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {std::move(v), std::move(report)};
}

std::pair<ValueVector, SolveReport> value_iteration(const TransitionTable& t,
                                                    const SolverOptions& opts) {
  return value_iteration(t, ValueVector(static_cast<std::size_t>(t.n), 0.0),
                         opts);
}

std::vector<double> to_value(const ValueVector& vhat, double floor) {
  if (!(floor > 0.0 && floor < 1.0)) {
    throw ConfigError("value floor must lie in (0,1)");
  }
  std::vector<double> out(vhat.size());
  for (std::size_t i = 0; i < vhat.size(); ++i) {
    if (vhat[i] <= floor) {
      out[i] = std::numeric_limits<double>::infinity();
    } else {
      double y = -std::log(vhat[i]);
      if (y == 0.0) y = 0.0;  // avoid -0 in serialized output
      out[i] = y;
    }
  }
  return out;
}

}  // namespace shepvi
