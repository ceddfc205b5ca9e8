#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shepvi/geometry.hpp"
#include "shepvi/kernels.hpp"
#include "shepvi/problems.hpp"
#include "shepvi/solver.hpp"

namespace shepvi {

struct FeedbackChoice {
  int index = -1;                // position in the problem's control list
  std::vector<double> control;
  double q_value = 0.0;          // cost(x,u) + V(f(x,u)) of the chosen u
};

// Bellman residual e(x) = min_u { c(x,u) + V(f(x,u)) } - V(x) and the stage
// cost of the minimizing control, per queried point.  A point outside the
// stabilizable set gets infinite entries.  in_R marks e <= eta * c_tilde
// where both sides are finite.
struct ResidualField {
  std::vector<double> e;
  std::vector<double> c_tilde;
  std::vector<std::uint8_t> in_R;
  double eta = 1.0;
};

struct DecayReport {
  double eta = 1.0;
  // First state index at which the accumulated-cost inequality
  //   V(x_l) <= V(x_0) - (1 - eta) * sum_{j<l} c_j + 1e-9
  // fails while every step before l stayed in R_eta; -1 when it never fails.
  int first_violation = -1;
  // First executed step whose source state is not in R_eta; -1 when none.
  int exit_index = -1;
  bool holds = true;              // no violation among the checked prefixes
  bool decay_held_until_exit = false;  // held everywhere, then left R_eta
};

// Greedy one-step feedback on top of a converged transformed value vector.
// The value extension V(x) used everywhere is: 0 on the target, +infinity
// outside the admissible region, otherwise -log of the Shepard evaluation of
// vhat at x (+infinity at or below the floor).
class FeedbackPolicy {
 public:
  FeedbackPolicy(ControlProblem problem, NodeSet nodes, ShapeFunction shape,
                 ValueVector vhat, bool converged,
                 double floor = kDefaultValueFloor);

  const ControlProblem& problem() const { return problem_; }
  const NodeSet& nodes() const { return nodes_; }
  double floor() const { return floor_; }

  double value_at(std::span<const double> x) const;
  std::vector<double> values_at(std::span<const double> points,
                                int count) const;

  // Minimizes c(x,u) + V(f(x,u)) over the control list; ties keep the lowest
  // index.  Throws NotStabilizableError when V(x) is infinite and
  // DeadEndError when every control leads to an infinite value.
  FeedbackChoice feedback_control(std::span<const double> x) const;

  // Runs the closed loop from x0 until the target is reached, no control
  // leads anywhere stabilizable, the state leaves the stabilizable set, or
  // max_steps controls were applied.  Only an x0 outside the stabilizable
  // set throws; everything after that is a recorded termination reason.
  Trajectory closed_loop(std::span<const double> x0, int max_steps) const;

  // Residuals for a batch of points (row major, count x dim).
  ResidualField bellman_residual(std::span<const double> points, int count,
                                 double eta = 1.0) const;

 private:
  double q_values(std::span<const double> x, std::span<double> q) const;

  ControlProblem problem_;
  NodeSet nodes_;
  ShapeFunction shape_;
  ValueVector vhat_;
  double floor_;
};

// Prefix decay check over a recorded trajectory: while the visited states
// stay in R_eta, the value must fall by at least (1 - eta) times the
// accumulated stage cost.
DecayReport check_decay(const Trajectory& traj, double eta);

}  // namespace shepvi
