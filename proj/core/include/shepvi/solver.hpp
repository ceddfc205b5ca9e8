#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shepvi/geometry.hpp"
#include "shepvi/kernels.hpp"
#include "shepvi/problems.hpp"
#include "shepvi/shepard.hpp"

namespace shepvi {

// Transformed values vhat = exp(-V) at the nodes; every entry lies in [0,1].
using ValueVector = std::vector<double>;

enum class ImageClass : std::uint8_t { interior = 0, target = 1, outside = 2 };

// Everything the value iteration needs, precomputed once: the n x m image
// states f(x_i, u_j), their discount weights exp(-c(x_i, u_j)), a class per
// image, and one Shepard matrix evaluating nodal coefficients at all interior
// images.  Layout is i-major, j-minor throughout.
struct TransitionTable {
  int n = 0;    // nodes
  int m = 0;    // controls
  int dim = 0;  // state dimension

  std::vector<double> images;              // (i*m + j)*dim + axis
  std::vector<double> weights;             // exp(-cost), in [0,1]
  std::vector<ImageClass> image_class;     // target before outside
  std::vector<std::int32_t> interior_row;  // Shepard row, -1 if not interior
  std::vector<std::uint8_t> node_in_target;
  ShepardMatrix image_matrix;  // interior images x nodes

  // max over off-target nodes and all controls of exp(-cost); the value
  // iteration contracts with at least this factor.
  double contraction_bound = 0.0;
  std::int64_t interior_count = 0;
  std::int64_t uncovered_interior = 0;  // interior images no node covers

  // True when neither a node nor an image reaches the target, so iteration
  // from zero stays identically zero.
  bool degenerate = false;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residuals;  // sup-norm successive deltas, one per pass
  double contraction_bound = 0.0;
  double wall_time_seconds = 0.0;
  bool converged = false;
  std::int64_t uncovered_interior = 0;
  bool degenerate = false;
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 2000;
};

// Evaluate all images, classify them (target, else outside the admissible
// region, else interior) and assemble the Shepard matrix at the interior
// images.  Negative or NaN stage costs abort with NumericError.
TransitionTable assemble_transitions(const ControlProblem& p,
                                     const NodeSet& nodes,
                                     const ShapeFunction& shape);

// One step of the projected Bellman operator.  Nodes in the target are
// pinned to 1; any other node i receives
//   max_j weights[i,j] * vbar(image[i,j])
// where vbar is 1 on target images, 0 on outside images and on images no
// node covers, and the Shepard evaluation of v otherwise.  Preserves [0,1]
// exactly and is monotone in v.
ValueVector bellman_apply(const TransitionTable& t, const ValueVector& v);

// Iterate bellman_apply from v0 until the sup-norm delta drops to tol or
// max_iter passes ran.  Hitting max_iter is reported, not thrown.
std::pair<ValueVector, SolveReport> value_iteration(const TransitionTable& t,
                                                    ValueVector v0,
                                                    const SolverOptions& opts);
// Same, starting from the zero vector (the standard initialization).
std::pair<ValueVector, SolveReport> value_iteration(const TransitionTable& t,
                                                    const SolverOptions& opts);

inline constexpr double kDefaultValueFloor = 1e-20;

// Untransformed values V = -log(vhat); entries at or below the floor map to
// +infinity (the state is considered outside the stabilizable set).
std::vector<double> to_value(const ValueVector& vhat,
                             double floor = kDefaultValueFloor);

}  // namespace shepvi
