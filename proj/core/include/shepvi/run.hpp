#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "shepvi/config.hpp"
#include "shepvi/feedback.hpp"
#include "shepvi/solver.hpp"

namespace shepvi {

// A fully materialized run setup: the problem, its node set, and the shape
// function resolved against that node set.
struct Instance {
  ControlProblem problem;
  NodeSet nodes;
  ShapeFunction shape;
  double fill = 0.0;        // fill distance h
  double separation = 0.0;  // separation distance q_X
  double delta = 0.0;       // min stage cost off the target over nodes
};

Instance build_instance(const RunConfig& cfg);

struct SolveArtifacts {
  Instance instance;
  TransitionTable table;
  ValueVector vhat;
  std::vector<double> value;  // -log(vhat), +inf at/below the floor
  SolveReport report;
};

// build_instance + assemble + iterate, no file output.
SolveArtifacts solve_instance(const RunConfig& cfg);

// The experiment drivers.  Each writes its CSV products into
// cfg.output_dir, prints a human-readable summary to `out`, and throws on
// failure (ConfigError / IoError / NumericError as appropriate).
void run_solve(const RunConfig& cfg, std::ostream& out);
void run_simulate(const RunConfig& cfg, std::span<const double> x0,
                  int max_steps, std::ostream& out);
void run_residual_map(const RunConfig& cfg, std::ostream& out);
void run_convergence_study(const RunConfig& cfg, std::ostream& out);
void run_compare_interpolation(const RunConfig& cfg, std::ostream& out);

}  // namespace shepvi
