#include "shepvi/shepard.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shepvi/detail/parallel.hpp"
#include "shepvi/errors.hpp"

namespace shepvi {

ShepardMatrix::ShepardMatrix(int rows, int cols,
                             std::vector<std::int64_t> offsets,
                             std::vector<std::int32_t> columns,
                             std::vector<double> values)
    : rows_(rows), cols_(cols), offsets_(std::move(offsets)),
      columns_(std::move(columns)), values_(std::move(values)) {
  if (rows_ < 0 || cols_ < 0 ||
      offsets_.size() != static_cast<std::size_t>(rows_) + 1 ||
      columns_.size() != values_.size() ||
      offsets_.back() != static_cast<std::int64_t>(values_.size()))
    throw std::invalid_argument("inconsistent sparse matrix buffers");
}

std::int64_t ShepardMatrix::uncovered_count() const {
  std::int64_t c = 0;
  for (int i = 0; i < rows_; ++i) c += row_uncovered(i);
  return c;
}

double ShepardMatrix::row_sum(int i) const {
  double s = 0.0;
  for (std::int64_t t = offsets_[i]; t < offsets_[i + 1]; ++t) s += values_[t];
  return s;
}

void ShepardMatrix::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(cols_))
    throw std::invalid_argument("coefficient vector length does not match columns");
  if (y.size() != static_cast<std::size_t>(rows_))
    throw std::invalid_argument("output vector length does not match rows");
  detail::parallel_for(rows_, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const std::int64_t lo = offsets_[i], hi = offsets_[i + 1];
      if (lo == hi) {
        y[i] = 0.0;
        continue;
      }
      double acc = 0.0;
      double vmin = x[columns_[lo]], vmax = vmin;
      for (std::int64_t t = lo; t < hi; ++t) {
        const double v = x[columns_[t]];
        acc += values_[t] * v;
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
      // A convex combination lies between the extremes of its inputs; pin
      // the rounded sum back into that interval.
      y[i] = std::min(std::max(acc, vmin), vmax);
    }
  });
}

std::vector<double> ShepardMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(rows_);
  apply(x, y);
  return y;
}

ShepardMatrix shepard_matrix(const NodeSet& nodes, const ShapeFunction& shape,
                             std::span<const double> points, int point_count) {
  if (point_count < 0 ||
      points.size() != static_cast<std::size_t>(point_count) * nodes.dim())
    throw std::invalid_argument("point buffer size does not match count");

  NeighborPairs pairs =
      point_count == 0
          ? NeighborPairs{{0}, {}, {}}
          : radius_neighbors(points, point_count, nodes.coords(), nodes.size(),
                             nodes.dim(), shape.assembly_radius());

  std::vector<std::int64_t> offsets(static_cast<std::size_t>(point_count) + 1, 0);
  std::vector<std::int32_t> columns;
  std::vector<double> values;
  columns.reserve(pairs.index.size());
  values.reserve(pairs.index.size());

  const bool floor_weights = shape.kind() == ShapeKind::gaussian;
  std::vector<double> w;
  for (int i = 0; i < point_count; ++i) {
    w.clear();
    double denom = 0.0;
    const std::int64_t lo = pairs.offsets[i], hi = pairs.offsets[i + 1];
    for (std::int64_t t = lo; t < hi; ++t) {
      double wi = shape(pairs.distance[t]);
      // Gaussian rows truncate their far tail and renormalize over the rest.
      if (floor_weights && wi < ShapeFunction::weight_floor) wi = 0.0;
      w.push_back(wi);
      denom += wi;
    }
    if (denom > 0.0) {
      for (std::int64_t t = lo; t < hi; ++t) {
        const double wi = w[t - lo];
        if (wi == 0.0) continue;
        columns.push_back(pairs.index[t]);
        values.push_back(wi / denom);
      }
    }
    offsets[i + 1] = static_cast<std::int64_t>(columns.size());
  }

  return ShepardMatrix(point_count, nodes.size(), std::move(offsets),
                       std::move(columns), std::move(values));
}

std::vector<double> shepard_apply(const NodeSet& nodes,
                                  const ShapeFunction& shape,
                                  std::span<const double> coeffs,
                                  std::span<const double> points,
                                  int point_count) {
  if (coeffs.size() != static_cast<std::size_t>(nodes.size()))
    throw std::invalid_argument("coefficient vector length does not match nodes");
  return shepard_matrix(nodes, shape, points, point_count).apply(coeffs);
}

struct RadialInterpolant::Impl {
  std::vector<double> coords;
  int n = 0;
  int dim = 0;
  ShapeFunction shape;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  Impl(const NodeSet& nodes, const ShapeFunction& shape_fn)
      : coords(nodes.coords().begin(), nodes.coords().end()),
        n(nodes.size()),
        dim(nodes.dim()),
        shape(shape_fn) {
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
      const double* xi = coords.data() + static_cast<std::size_t>(i) * dim;
      for (int j = 0; j < n; ++j) {
        const double* xj = coords.data() + static_cast<std::size_t>(j) * dim;
        double d2 = 0.0;
        for (int k = 0; k < dim; ++k) {
          const double d = xi[k] - xj[k];
          d2 += d * d;
        }
        A(i, j) = shape(std::sqrt(d2));
      }
    }
    lu.compute(A);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-12))
      throw ConditioningError(
          "interpolation system is too ill-conditioned (estimated condition "
          "number above 1e12)");
  }
};

RadialInterpolant::RadialInterpolant(const NodeSet& nodes,
                                     const ShapeFunction& shape)
    : impl_(std::make_shared<const Impl>(nodes, shape)) {}

std::vector<double> RadialInterpolant::evaluate(std::span<const double> values,
                                                std::span<const double> points,
                                                int point_count) const {
  const Impl& im = *impl_;
  if (values.size() != static_cast<std::size_t>(im.n))
    throw std::invalid_argument("value vector length does not match nodes");
  if (point_count < 0 ||
      points.size() != static_cast<std::size_t>(point_count) * im.dim)
    throw std::invalid_argument("point buffer size does not match count");

  Eigen::VectorXd rhs(im.n);
  for (int i = 0; i < im.n; ++i) rhs(i) = values[i];
  const Eigen::VectorXd c = im.lu.solve(rhs);

  std::vector<double> out(point_count);
  detail::parallel_for(point_count, [&](std::int64_t pb, std::int64_t pe) {
    for (std::int64_t p = pb; p < pe; ++p) {
      const double* y = points.data() + static_cast<std::size_t>(p) * im.dim;
      double acc = 0.0;
      for (int j = 0; j < im.n; ++j) {
        const double* xj =
            im.coords.data() + static_cast<std::size_t>(j) * im.dim;
        double d2 = 0.0;
        for (int k = 0; k < im.dim; ++k) {
          const double d = y[k] - xj[k];
          d2 += d * d;
        }
        acc += c(j) * im.shape(std::sqrt(d2));
      }
      out[p] = acc;
    }
  });
  return out;
}

std::vector<double> interpolate(const NodeSet& nodes,
                                const ShapeFunction& shape,
                                std::span<const double> values,
                                std::span<const double> points,
                                int point_count) {
  return RadialInterpolant(nodes, shape).evaluate(values, points, point_count);
}

}  // namespace shepvi
