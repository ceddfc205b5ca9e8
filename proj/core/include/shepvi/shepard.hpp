#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shepvi/geometry.hpp"
#include "shepvi/kernels.hpp"

namespace shepvi {

// Sparse row-stochastic matrix of Shepard basis values,
//
//   A_ij = w(x_j, y_i) / sum_l w(x_l, y_i),   w(xi, y) = phi^sigma(|xi - y|),
//
// one row per evaluation point, one column per node.  Rows of points with no
// node inside the assembly radius stay empty and are flagged uncovered; a
// product with such a row yields 0.  Entries within a row are stored with
// ascending column index and accumulated in that order, so products are
// bit-for-bit reproducible.
class ShepardMatrix {
 public:
  ShepardMatrix() : rows_(0), cols_(0), offsets_{0} {}
  ShepardMatrix(int rows, int cols, std::vector<std::int64_t> offsets,
                std::vector<std::int32_t> columns, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const std::int64_t> offsets() const { return offsets_; }
  std::span<const std::int32_t> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

  bool row_uncovered(int i) const { return offsets_[i] == offsets_[i + 1]; }
  std::int64_t uncovered_count() const;
  double row_sum(int i) const;

  // y = A x.  Each covered row is additionally clamped to the range of the
  // coefficients it touches, which makes the convex-combination bounds
  // |y_i| <= max |x_j| and monotonicity hold exactly in floating point.
  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;

 private:
  int rows_, cols_;
  std::vector<std::int64_t> offsets_;
  std::vector<std::int32_t> columns_;
  std::vector<double> values_;
};

// Assemble the Shepard matrix of `nodes` evaluated at `points` (row major,
// point_count x dim).  Gaussian weights below ShapeFunction::weight_floor
// are dropped before normalization.
ShepardMatrix shepard_matrix(const NodeSet& nodes, const ShapeFunction& shape,
                             std::span<const double> points, int point_count);

// Shepard evaluation of nodal coefficients at the given points.
std::vector<double> shepard_apply(const NodeSet& nodes,
                                  const ShapeFunction& shape,
                                  std::span<const double> coeffs,
                                  std::span<const double> points,
                                  int point_count);

// Radial interpolation through the same shape function: solves the dense
// system  sum_j c_j phi(|x_i - x_j|) = values_i  and evaluates the resulting
// expansion at `points`.  Unlike the Shepard operator this reproduces nodal
// values exactly but is not monotone and may amplify sup norms.  Raises
// ConditioningError when the estimated condition number exceeds 1e12.
std::vector<double> interpolate(const NodeSet& nodes,
                                const ShapeFunction& shape,
                                std::span<const double> values,
                                std::span<const double> points,
                                int point_count);

// Same interpolation with the dense factorization computed once, for
// repeated evaluation against changing nodal values.
class RadialInterpolant {
 public:
  RadialInterpolant(const NodeSet& nodes, const ShapeFunction& shape);

  std::vector<double> evaluate(std::span<const double> values,
                               std::span<const double> points,
                               int point_count) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace shepvi
