#pragma once

#include <limits>

namespace shepvi {

enum class ShapeKind {
  wendland42,  // compactly supported, C^2, positive definite up to dim 3
  gaussian,    // infinitely smooth, global support
};

// Radial shape function family phi^sigma(r) = phi(sigma * r).
//
//   wendland42: phi(t) = max(0, (1 - t)^4 * (4 t + 1))
//   gaussian:   phi(t) = exp(-t^2)
//
// sigma scales the argument, so the support of the Wendland function is the
// ball of radius 1/sigma.  Weights are built by evaluating at Euclidean
// distances, phi^sigma(|xi - x|).
class ShapeFunction {
 public:
  ShapeFunction(ShapeKind kind, double sigma);

  // phi^sigma(r).  r must be nonnegative.
  double operator()(double r) const;

  // Radius beyond which the function vanishes identically.
  // +infinity for the Gaussian.
  double support_radius() const;

  // Finite cutoff radius used for sparse weight assembly.  Equal to
  // support_radius() for compactly supported kinds; for the Gaussian it is
  // the distance at which the weight drops below weight_floor (such weights
  // are treated as zero and rows are renormalized over what remains).
  double assembly_radius() const;

  // Support radius of the unscaled function phi = phi^1 (the "rho" entering
  // the stationary approximation error bound).  +infinity for the Gaussian.
  static double normalized_support(ShapeKind kind);

  ShapeKind kind() const { return kind_; }
  double sigma() const { return sigma_; }

  // Gaussian weights below this value are dropped during assembly.
  static constexpr double weight_floor = 1e-14;

 private:
  ShapeKind kind_;
  double sigma_;
};

// Stationary shape parameter rule sigma_k = c_sigma / h_k for fill distance
// h_k.  Keeping c_sigma fixed while h shrinks keeps the number of nodes per
// support roughly constant.
double sigma_from_fill(double c_sigma, double h);

}  // namespace shepvi
