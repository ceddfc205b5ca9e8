#pragma once

#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shepvi/geometry.hpp"
#include "shepvi/pgm.hpp"

namespace shepvi {

// Terminal set of a control problem.
struct Target {
  enum class Kind { box, ball };
  Kind kind = Kind::box;
  std::vector<double> center;
  std::vector<double> halfwidth;  // per-axis for box; [0] is the radius for ball

  bool contains(std::span<const double> x) const;
};

enum class ProjectionMode { none, clamp };

// Discrete-time optimal control problem on a box state space: dynamics
// x' = f(x, u), nonnegative stage cost c(x, u), finite control set, and a
// terminal target set.  step() applies the configured projection; the raw
// map may leave the domain (the solver treats such transitions as lost).
struct ControlProblem {
  std::string name;
  int dim = 0;
  std::vector<std::vector<double>> controls;
  BoxDomain domain;
  Target target;
  ProjectionMode projection = ProjectionMode::none;
  std::shared_ptr<const ObstacleMask> mask;  // planar problems only

  std::function<void(std::span<const double>, std::span<const double>,
                     std::span<double>)>
      step_fn;
  std::function<double(std::span<const double>, std::span<const double>)>
      cost_fn;
};

std::vector<double> step(const ControlProblem& p, std::span<const double> x,
                         std::span<const double> u);
double cost(const ControlProblem& p, std::span<const double> x,
            std::span<const double> u);
bool in_target(const ControlProblem& p, std::span<const double> x);

// A state is admissible when it lies in the domain box and, if an obstacle
// mask is attached, in an admissible pixel.  Non-finite states never are.
bool admissible(const ControlProblem& p, std::span<const double> x);

// Smallest stage cost over all (node outside target) x control pairs.  The
// value-iteration contraction factor is exp(-delta); a zero estimate means
// the problem admits free motion and must be rejected.
double delta_estimate(const ControlProblem& p, const NodeSet& nodes);

// Closed-loop simulation record.  states has one more entry than controls
// and costs; values, residuals and stage_bounds follow the visited states.
struct Trajectory {
  enum class Termination { target, dead_end, left_stabilizable, max_steps };

  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> controls;
  std::vector<int> control_index;
  std::vector<double> costs;      // stage cost of each executed transition
  std::vector<double> values;     // V at every visited state
  std::vector<double> residuals;  // one-step residual e where a control ran
  Termination reason = Termination::max_steps;

  int steps() const { return static_cast<int>(controls.size()); }
};

// Named problem factories.  Every physical parameter can be overridden
// through the JSON object; unknown keys are rejected.
//
//   linear1d:       x' = a u x on [0, 1], c = a x, target [0, 1/(2k)]
//   shortest_path:  x' = x + dt u, |u| = 1 (m directions), c = 1, planar,
//                   optionally masked by an obstacle raster
//   pendulum:       cart-pole linearized force balance, explicit Euler
//   magnetic_wheel: magnet levitation model, explicit Euler with substeps
ControlProblem make_problem(const std::string& name,
                            const nlohmann::json& overrides = {},
                            std::shared_ptr<const ObstacleMask> mask = nullptr);

// Continuous-time right-hand sides, exposed for direct inspection.
double pendulum_acceleration(double phi, double phidot, double u,
                             double mass_cart, double mass_pole, double length,
                             double gravity);
void magnetic_wheel_rhs(std::span<const double> x, double u,
                        std::span<double> dx, double s0, double l_n,
                        double mass, double mu, double resistance,
                        double l_s, double gravity);

// Default per-problem configuration snippets (grid sizes, kernel choice).
nlohmann::json problem_defaults(const std::string& name);

}  // namespace shepvi
