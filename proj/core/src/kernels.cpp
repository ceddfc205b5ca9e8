#include "shepvi/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace shepvi {

ShapeFunction::ShapeFunction(ShapeKind kind, double sigma)
    : kind_(kind), sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::domain_error("shape parameter sigma must be positive and finite");
}

double ShapeFunction::operator()(double r) const {
  if (!(r >= 0.0)) throw std::domain_error("shape function argument must be nonnegative");
  const double t = sigma_ * r;
  switch (kind_) {
    case ShapeKind::wendland42: {
      if (t >= 1.0) return 0.0;
      const double s = 1.0 - t;
      const double s2 = s * s;
      return s2 * s2 * (4.0 * t + 1.0);
    }
    case ShapeKind::gaussian:
      return std::exp(-t * t);
  }
  throw std::logic_error("unreachable shape kind");
}

double ShapeFunction::support_radius() const {
  switch (kind_) {
    case ShapeKind::wendland42:
      return 1.0 / sigma_;
    case ShapeKind::gaussian:
      return std::numeric_limits<double>::infinity();
  }
  throw std::logic_error("unreachable shape kind");
}

double ShapeFunction::assembly_radius() const {
  switch (kind_) {
    case ShapeKind::wendland42:
      return 1.0 / sigma_;
    case ShapeKind::gaussian:
      // exp(-(sigma r)^2) >= weight_floor  <=>  r <= sqrt(-log(floor)) / sigma
      return std::sqrt(-std::log(weight_floor)) / sigma_;
  }
  throw std::logic_error("unreachable shape kind");
}

double ShapeFunction::normalized_support(ShapeKind kind) {
  return kind == ShapeKind::wendland42
             ? 1.0
             : std::numeric_limits<double>::infinity();
}

double sigma_from_fill(double c_sigma, double h) {
  if (!(c_sigma > 0.0)) throw std::domain_error("c_sigma must be positive");
  if (!(h > 0.0)) throw std::domain_error("fill distance must be positive");
  return c_sigma / h;
}

}  // namespace shepvi
