#include "shepvi/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "shepvi/detail/parallel.hpp"
#include "shepvi/errors.hpp"

namespace shepvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double untransform(double vhat, double floor) {
  if (vhat <= floor) return kInf;
  double y = -std::log(vhat);
  if (y == 0.0) y = 0.0;
  return y;
}

std::string floor_message(double floor) {
  char buf[96];
  std::snprintf(buf, sizeof buf,
                "state is outside the stabilizable set (vhat <= floor %g)",
                floor);
  return buf;
}

}  // namespace

FeedbackPolicy::FeedbackPolicy(ControlProblem problem, NodeSet nodes,
                               ShapeFunction shape, ValueVector vhat,
                               bool converged, double floor)
    : problem_(std::move(problem)),
      nodes_(std::move(nodes)),
      shape_(shape),
      vhat_(std::move(vhat)),
      floor_(floor) {
  if (!converged) {
    throw NumericError(
        "feedback synthesis requires a converged value iteration");
  }
  if (static_cast<int>(vhat_.size()) != nodes_.size()) {
    throw NumericError("value vector length does not match the node set");
  }
  if (nodes_.dim() != problem_.dim) {
    throw ConfigError("node set dimension does not match the problem");
  }
  if (!(floor_ > 0.0 && floor_ < 1.0)) {
    throw ConfigError("value floor must lie in (0,1)");
  }
}

std::vector<double> FeedbackPolicy::values_at(std::span<const double> points,
                                              int count) const {
  const int dim = problem_.dim;
  std::vector<double> out(static_cast<std::size_t>(count));
  std::vector<double> query;
  std::vector<int> query_pos;
  for (int i = 0; i < count; ++i) {
    const auto x = points.subspan(static_cast<std::size_t>(i) * dim,
                                  static_cast<std::size_t>(dim));
    if (problem_.target.contains(x)) {
      out[static_cast<std::size_t>(i)] = 0.0;
    } else if (!admissible(problem_, x)) {
      out[static_cast<std::size_t>(i)] = kInf;
    } else {
      query_pos.push_back(i);
      query.insert(query.end(), x.begin(), x.end());
    }
  }
  if (!query_pos.empty()) {
    const auto vals = shepard_apply(nodes_, shape_, vhat_, query,
                                    static_cast<int>(query_pos.size()));
    for (std::size_t k = 0; k < query_pos.size(); ++k) {
      out[static_cast<std::size_t>(query_pos[k])] =
          untransform(vals[k], floor_);
    }
  }
  return out;
}

double FeedbackPolicy::value_at(std::span<const double> x) const {
  return values_at(x, 1)[0];
}

double FeedbackPolicy::q_values(std::span<const double> x,
                                std::span<double> q) const {
  const int dim = problem_.dim;
  const int m = static_cast<int>(problem_.controls.size());
  std::vector<double> images(static_cast<std::size_t>(m) * dim);
  std::vector<double> y(static_cast<std::size_t>(dim));
  for (int j = 0; j < m; ++j) {
    const auto& u = problem_.controls[static_cast<std::size_t>(j)];
    problem_.step_fn(x, u, y);
    if (problem_.projection == ProjectionMode::clamp) {
      problem_.domain.clamp(y, y);
    }
    std::copy(y.begin(), y.end(),
              images.begin() + static_cast<std::size_t>(j) * dim);
  }
  const auto v_img = values_at(images, m);
  double best = kInf;
  for (int j = 0; j < m; ++j) {
    const auto& u = problem_.controls[static_cast<std::size_t>(j)];
    const double qj = problem_.cost_fn(x, u) + v_img[static_cast<std::size_t>(j)];
    q[static_cast<std::size_t>(j)] = qj;
    best = std::min(best, qj);
  }
  return best;
}

FeedbackChoice FeedbackPolicy::feedback_control(
    std::span<const double> x) const {
  const double vx = value_at(x);
  if (!std::isfinite(vx)) throw NotStabilizableError(floor_message(floor_));

  const int m = static_cast<int>(problem_.controls.size());
  std::vector<double> q(static_cast<std::size_t>(m));
  q_values(x, q);

  FeedbackChoice choice;
  choice.q_value = kInf;
  for (int j = 0; j < m; ++j) {
    if (q[static_cast<std::size_t>(j)] < choice.q_value) {
      choice.q_value = q[static_cast<std::size_t>(j)];
      choice.index = j;
    }
  }
  if (choice.index < 0) {
    throw DeadEndError("every control leads outside the stabilizable set");
  }
  choice.control = problem_.controls[static_cast<std::size_t>(choice.index)];
  return choice;
}

Trajectory FeedbackPolicy::closed_loop(std::span<const double> x0,
                                       int max_steps) const {
  if (static_cast<int>(x0.size()) != problem_.dim) {
    throw ConfigError("initial state dimension does not match the problem");
  }
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");

  Trajectory traj;
  traj.states.emplace_back(x0.begin(), x0.end());
  traj.values.push_back(value_at(x0));
  if (!in_target(problem_, x0) && !std::isfinite(traj.values[0])) {
    throw NotStabilizableError(floor_message(floor_));
  }

  const int m = static_cast<int>(problem_.controls.size());
  std::vector<double> q(static_cast<std::size_t>(m));
  for (int s = 0; s < max_steps; ++s) {
    const auto& x = traj.states.back();
    if (in_target(problem_, x)) {
      traj.reason = Trajectory::Termination::target;
      return traj;
    }
    if (!std::isfinite(traj.values.back())) {
      traj.reason = Trajectory::Termination::left_stabilizable;
      return traj;
    }

    const double qmin = q_values(x, q);
    if (!std::isfinite(qmin)) {
      traj.reason = Trajectory::Termination::dead_end;
      return traj;
    }
    int best = 0;
    while (q[static_cast<std::size_t>(best)] > qmin) ++best;

    const auto& u = problem_.controls[static_cast<std::size_t>(best)];
    traj.residuals.push_back(qmin - traj.values.back());
    traj.costs.push_back(problem_.cost_fn(x, u));
    traj.controls.push_back(u);
    traj.control_index.push_back(best);

    auto y = step(problem_, x, u);
    traj.values.push_back(value_at(y));
    traj.states.push_back(std::move(y));
  }

  if (in_target(problem_, traj.states.back())) {
    traj.reason = Trajectory::Termination::target;
  } else if (!std::isfinite(traj.values.back())) {
    traj.reason = Trajectory::Termination::left_stabilizable;
  } else {
    traj.reason = Trajectory::Termination::max_steps;
  }
  return traj;
}

ResidualField FeedbackPolicy::bellman_residual(std::span<const double> points,
                                               int count, double eta) const {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ConfigError("eta must lie in (0,1]");
  }
  const int dim = problem_.dim;
  const int m = static_cast<int>(problem_.controls.size());

  const auto v_pts = values_at(points, count);

  std::vector<double> images(static_cast<std::size_t>(count) * m * dim);
  detail::parallel_for(count, [&](std::int64_t ib, std::int64_t ie) {
    std::vector<double> y(static_cast<std::size_t>(dim));
    for (std::int64_t i = ib; i < ie; ++i) {
      const auto x = points.subspan(static_cast<std::size_t>(i) * dim,
                                    static_cast<std::size_t>(dim));
      for (int j = 0; j < m; ++j) {
        const auto& u = problem_.controls[static_cast<std::size_t>(j)];
        problem_.step_fn(x, u, y);
        if (problem_.projection == ProjectionMode::clamp) {
          problem_.domain.clamp(y, y);
        }
        std::copy(y.begin(), y.end(),
                  images.begin() + (i * m + j) * dim);
      }
    }
  });
  const auto v_img = values_at(images, count * m);

  ResidualField field;
  field.eta = eta;
  field.e.resize(static_cast<std::size_t>(count));
  field.c_tilde.resize(static_cast<std::size_t>(count));
  field.in_R.resize(static_cast<std::size_t>(count));
  detail::parallel_for(count, [&](std::int64_t ib, std::int64_t ie) {
    for (std::int64_t i = ib; i < ie; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      if (!std::isfinite(v_pts[idx])) {
        field.e[idx] = kInf;
        field.c_tilde[idx] = kInf;
        field.in_R[idx] = 0;
        continue;
      }
      const auto x = points.subspan(idx * dim, static_cast<std::size_t>(dim));
      double qmin = kInf;
      int best = -1;
      for (int j = 0; j < m; ++j) {
        const auto& u = problem_.controls[static_cast<std::size_t>(j)];
        const double qj =
            problem_.cost_fn(x, u) + v_img[idx * m + static_cast<std::size_t>(j)];
        if (qj < qmin) {
          qmin = qj;
          best = j;
        }
      }
      if (best < 0) {
        field.e[idx] = kInf;
        field.c_tilde[idx] = kInf;
        field.in_R[idx] = 0;
        continue;
      }
      field.e[idx] = qmin - v_pts[idx];
      field.c_tilde[idx] = problem_.cost_fn(
          x, problem_.controls[static_cast<std::size_t>(best)]);
      field.in_R[idx] = std::isfinite(field.e[idx]) &&
                                std::isfinite(field.c_tilde[idx]) &&
                                field.e[idx] <= eta * field.c_tilde[idx]
                            ? 1
                            : 0;
    }
  });
  return field;
}

DecayReport check_decay(const Trajectory& traj, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ConfigError("eta must lie in (0,1]");
  }
  DecayReport report;
  report.eta = eta;

  const int steps = traj.steps();
  report.exit_index = -1;
  for (int j = 0; j < steps; ++j) {
    const double e = traj.residuals[static_cast<std::size_t>(j)];
    const double c = traj.costs[static_cast<std::size_t>(j)];
    const bool in_R = std::isfinite(e) && std::isfinite(c) && e <= eta * c;
    if (!in_R) {
      report.exit_index = j;
      break;
    }
  }

  const int last = report.exit_index < 0 ? steps : report.exit_index;
  double accumulated = 0.0;
  for (int l = 1; l <= last; ++l) {
    accumulated += traj.costs[static_cast<std::size_t>(l - 1)];
    const double bound =
        traj.values[0] - (1.0 - eta) * accumulated + 1e-9;
    if (!(traj.values[static_cast<std::size_t>(l)] <= bound)) {
      report.first_violation = l;
      break;
    }
  }
  report.holds = report.first_violation < 0;
  report.decay_held_until_exit = report.holds && report.exit_index >= 0;
  return report;
}

}  // namespace shepvi
