#include "shepvi/problems.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "shepvi/errors.hpp"

namespace shepvi {

namespace {

// Consumes known keys from an override object and rejects leftovers, so a
// typo in a config file fails loudly instead of silently using defaults.
class Overrides {
 public:
  Overrides(const nlohmann::json& j, std::string problem)
      : remaining_(j.is_null() ? nlohmann::json::object() : j),
        problem_(std::move(problem)) {
    if (!remaining_.is_object()) {
      throw ConfigError("problem overrides for " + problem_ +
                        " must be a JSON object");
    }
  }

  double number(const char* key, double fallback) {
    auto it = remaining_.find(key);
    if (it == remaining_.end()) return fallback;
    if (!it->is_number()) bad_type(key, "a number");
    const double v = it->get<double>();
    remaining_.erase(it);
    return v;
  }

  int integer(const char* key, int fallback) {
    auto it = remaining_.find(key);
    if (it == remaining_.end()) return fallback;
    if (!it->is_number_integer()) bad_type(key, "an integer");
    const int v = it->get<int>();
    remaining_.erase(it);
    return v;
  }

  bool boolean(const char* key, bool fallback) {
    auto it = remaining_.find(key);
    if (it == remaining_.end()) return fallback;
    if (!it->is_boolean()) bad_type(key, "a boolean");
    const bool v = it->get<bool>();
    remaining_.erase(it);
    return v;
  }

  std::vector<double> numbers(const char* key, std::vector<double> fallback,
                              std::size_t size) {
    auto it = remaining_.find(key);
    if (it == remaining_.end()) return fallback;
    if (!it->is_array()) bad_type(key, "an array of numbers");
    std::vector<double> v;
    for (const auto& e : *it) {
      if (!e.is_number()) bad_type(key, "an array of numbers");
      v.push_back(e.get<double>());
    }
    if (v.size() != size) {
      throw ConfigError("problem." + std::string(key) + " for " + problem_ +
                        " must have " + std::to_string(size) + " entries");
    }
    remaining_.erase(it);
    return v;
  }

  ProjectionMode projection() {
    auto it = remaining_.find("projection");
    if (it == remaining_.end()) return ProjectionMode::none;
    if (it->is_string()) {
      const auto s = it->get<std::string>();
      remaining_.erase(it);
      if (s == "none") return ProjectionMode::none;
      if (s == "clamp") return ProjectionMode::clamp;
    }
    throw ConfigError("problem.projection must be \"none\" or \"clamp\"");
  }

  void finish() const {
    if (remaining_.empty()) return;
    throw ConfigError("unknown problem override \"" +
                      remaining_.items().begin().key() + "\" for " + problem_);
  }

 private:
  [[noreturn]] void bad_type(const char* key, const char* want) const {
    throw ConfigError("problem." + std::string(key) + " for " + problem_ +
                      " must be " + want);
  }

  nlohmann::json remaining_;
  std::string problem_;
};

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw ConfigError("control grid needs at least one point");
  std::vector<double> v(static_cast<std::size_t>(count));
  if (count == 1) {
    v[0] = 0.5 * (lo + hi);
    return v;
  }
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = lo + i * step;
  v.back() = hi;
  return v;
}

BoxDomain box_from(Overrides& ov, std::vector<double> lower,
                   std::vector<double> upper) {
  const auto dim = lower.size();
  auto lo = ov.numbers("domain_lower", std::move(lower), dim);
  auto hi = ov.numbers("domain_upper", std::move(upper), dim);
  return BoxDomain(std::move(lo), std::move(hi));
}

Target box_target(Overrides& ov, std::vector<double> center,
                  std::vector<double> halfwidth) {
  const auto dim = center.size();
  Target t;
  t.kind = Target::Kind::box;
  t.center = ov.numbers("target_center", std::move(center), dim);
  t.halfwidth = ov.numbers("target_halfwidth", std::move(halfwidth), dim);
  for (double h : t.halfwidth) {
    if (!(h > 0.0)) throw ConfigError("target halfwidths must be positive");
  }
  return t;
}

void validate(const ControlProblem& p) {
  if (p.controls.empty()) {
    throw ConfigError("problem " + p.name + " has an empty control set");
  }
  for (const auto& u : p.controls) {
    if (u.size() != p.controls.front().size()) {
      throw ConfigError("problem " + p.name +
                        " mixes control vectors of different sizes");
    }
  }
  // The target must reach into the domain, otherwise no node can ever be
  // terminal and the value function is identically zero.
  const auto& t = p.target;
  for (int i = 0; i < p.dim; ++i) {
    const auto a = static_cast<std::size_t>(i);
    const double hw =
        t.kind == Target::Kind::box ? t.halfwidth[a] : t.halfwidth[0];
    if (t.center[a] + hw < p.domain.lower(i) ||
        t.center[a] - hw > p.domain.upper(i)) {
      throw ConfigError("problem " + p.name +
                        " has a target set disjoint from the domain");
    }
  }
}

void euler_steps(const std::function<void(std::span<const double>, double,
                                          std::span<double>)>& rhs,
                 std::span<const double> x, double u, double dt, int substeps,
                 std::span<double> out) {
  const auto dim = x.size();
  assert(out.size() == dim);
  std::copy(x.begin(), x.end(), out.begin());
  std::vector<double> dx(dim);
  const double tau = dt / substeps;
  for (int s = 0; s < substeps; ++s) {
    rhs(out, u, dx);
    for (std::size_t i = 0; i < dim; ++i) out[i] += tau * dx[i];
  }
}

ControlProblem make_linear1d(const nlohmann::json& overrides) {
  Overrides ov(overrides, "linear1d");
  const double a = ov.number("a", 0.8);
  const int k = ov.integer("k", 64);
  if (k < 1) throw ConfigError("linear1d k must be a positive integer");
  const int m = ov.integer("num_controls", 21);

  ControlProblem p;
  p.name = "linear1d";
  p.dim = 1;
  for (double u : linspace(-1.0, 1.0, m)) p.controls.push_back({u});
  p.domain = box_from(ov, {0.0}, {1.0});
  const double half = 1.0 / (4.0 * k);
  p.target = box_target(ov, {half}, {half});
  p.projection = ov.projection();
  p.step_fn = [a](std::span<const double> x, std::span<const double> u,
                  std::span<double> y) { y[0] = a * u[0] * x[0]; };
  p.cost_fn = [a](std::span<const double> x, std::span<const double>) {
    return a * x[0];
  };
  ov.finish();
  return p;
}

ControlProblem make_shortest_path(const nlohmann::json& overrides,
                                  std::shared_ptr<const ObstacleMask> mask) {
  Overrides ov(overrides, "shortest_path");
  const double dt = ov.number("dt", 0.1);
  if (!(dt > 0.0)) throw ConfigError("shortest_path dt must be positive");
  const int nd = ov.integer("num_directions", 20);
  if (nd < 1) {
    throw ConfigError("shortest_path num_directions must be positive");
  }

  ControlProblem p;
  p.name = "shortest_path";
  p.dim = 2;
  for (int j = 0; j < nd; ++j) {
    const double angle = 2.0 * std::numbers::pi * j / nd;
    p.controls.push_back({std::cos(angle), std::sin(angle)});
  }
  std::vector<double> lo{-10.0, -10.0};
  std::vector<double> hi{10.0, 10.0};
  if (mask) {
    lo = {mask->world_min()[0], mask->world_min()[1]};
    hi = {mask->world_max()[0], mask->world_max()[1]};
  }
  p.domain = box_from(ov, std::move(lo), std::move(hi));
  p.target = box_target(ov, {-4.0, 4.0}, {0.004, 0.004});
  p.projection = ov.projection();
  p.mask = std::move(mask);
  p.step_fn = [dt](std::span<const double> x, std::span<const double> u,
                   std::span<double> y) {
    y[0] = x[0] + dt * u[0];
    y[1] = x[1] + dt * u[1];
  };
  p.cost_fn = [](std::span<const double>, std::span<const double>) {
    return 1.0;
  };
  ov.finish();
  return p;
}

ControlProblem make_pendulum(const nlohmann::json& overrides) {
  Overrides ov(overrides, "pendulum");
  const double dt = ov.number("dt", 0.1);
  const int substeps = ov.integer("substeps", 1);
  if (!(dt > 0.0) || substeps < 1) {
    throw ConfigError("pendulum needs dt > 0 and substeps >= 1");
  }
  const double mass_cart = ov.number("mass_cart", 8.0);
  const double mass_pole = ov.number("mass_pole", 2.0);
  const double length = ov.number("length", 0.5);
  const double gravity = ov.number("gravity", 9.8);
  const double cmax = ov.number("control_max", 128.0);
  const double cstep = ov.number("control_step", 8.0);
  if (!(cstep > 0.0)) throw ConfigError("pendulum control_step must be > 0");
  const auto weights = ov.numbers("cost_weights", {0.1, 0.05, 0.01}, 3);

  ControlProblem p;
  p.name = "pendulum";
  p.dim = 2;
  const int half_count = static_cast<int>(std::lround(cmax / cstep));
  for (int i = -half_count; i <= half_count; ++i) {
    p.controls.push_back({i * cstep});
  }
  p.domain = box_from(ov, {-8.0, -10.0}, {8.0, 10.0});
  p.target = box_target(ov, {0.0, 0.0}, {0.1, 0.1});
  p.projection = ov.projection();
  auto rhs = [mass_cart, mass_pole, length, gravity](
                 std::span<const double> x, double u, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = pendulum_acceleration(x[0], x[1], u, mass_cart, mass_pole, length,
                                  gravity);
  };
  p.step_fn = [rhs, dt, substeps](std::span<const double> x,
                                  std::span<const double> u,
                                  std::span<double> y) {
    euler_steps(rhs, x, u[0], dt, substeps, y);
  };
  p.cost_fn = [weights](std::span<const double> x, std::span<const double> u) {
    return 0.5 * (weights[0] * x[0] * x[0] + weights[1] * x[1] * x[1] +
                  weights[2] * u[0] * u[0]);
  };
  ov.finish();
  return p;
}

ControlProblem make_magnetic_wheel(const nlohmann::json& overrides) {
  Overrides ov(overrides, "magnetic_wheel");
  const double dt = ov.number("dt", 0.01);
  const int substeps = ov.integer("substeps", 5);
  if (!(dt > 0.0) || substeps < 1) {
    throw ConfigError("magnetic_wheel needs dt > 0 and substeps >= 1");
  }
  const double s0 = ov.number("s0", 0.01);
  const double l_n = ov.number("l_n", 1.0);
  const double mass = ov.number("mass", 500.0);
  const double mu = ov.number("mu", 3.0);
  const double resistance = ov.number("resistance", 4.0);
  const double l_s = ov.number("l_s", 0.15);
  const double gravity = ov.number("gravity", 9.81);
  const int ccount = ov.integer("control_count", 201);
  const double camp = ov.number("control_amplitude", 6000.0);
  const bool shifted = ov.boolean("shifted_cost", false);
  const auto weights = ov.numbers("cost_weights", {100.0, 1.0, 0.002}, 3);
  if (!(s0 > 0.0)) throw ConfigError("magnetic_wheel s0 must be positive");

  // Equilibrium current: gravity balances the magnetic force at gap s0.
  const double coil = 2.0 * l_n * s0;
  const double j0 = std::sqrt(4.0 * mass * s0 * s0 * mu * gravity / coil);
  const double u_eq = resistance * j0;

  ControlProblem p;
  p.name = "magnetic_wheel";
  p.dim = 3;
  for (double t : linspace(-1.0, 1.0, ccount)) {
    p.controls.push_back({camp * t * t * t});
  }
  p.domain = box_from(ov, {0.0, -4.0, j0 - 80.0}, {0.02, 4.0, j0 + 80.0});
  p.target = box_target(ov, {s0, 0.0, j0}, {0.001, 0.1, 2.0});
  p.projection = ov.projection();
  auto rhs = [s0, l_n, mass, mu, resistance, l_s, gravity](
                 std::span<const double> x, double u, std::span<double> dx) {
    magnetic_wheel_rhs(x, u, dx, s0, l_n, mass, mu, resistance, l_s, gravity);
  };
  p.step_fn = [rhs, dt, substeps](std::span<const double> x,
                                  std::span<const double> u,
                                  std::span<double> y) {
    euler_steps(rhs, x, u[0], dt, substeps, y);
  };
  if (shifted) {
    p.cost_fn = [weights, s0, u_eq](std::span<const double> x,
                                    std::span<const double> u) {
      const double ds = x[0] - s0;
      const double du = u[0] - u_eq;
      return 0.5 *
             (weights[0] * ds * ds + weights[1] * x[1] * x[1] +
              weights[2] * du * du);
    };
  } else {
    p.cost_fn = [weights](std::span<const double> x,
                          std::span<const double> u) {
      return 0.5 * (weights[0] * x[0] * x[0] + weights[1] * x[1] * x[1] +
                    weights[2] * u[0] * u[0]);
    };
  }
  ov.finish();
  return p;
}

}  // namespace

bool Target::contains(std::span<const double> x) const {
  if (kind == Kind::ball) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - center[i];
      d2 += d * d;
    }
    return d2 <= halfwidth[0] * halfwidth[0];
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(std::fabs(x[i] - center[i]) <= halfwidth[i])) return false;
  }
  return true;
}

std::vector<double> step(const ControlProblem& p, std::span<const double> x,
                         std::span<const double> u) {
  assert(static_cast<int>(x.size()) == p.dim);
  std::vector<double> y(x.size());
  p.step_fn(x, u, y);
  if (p.projection == ProjectionMode::clamp) p.domain.clamp(y, y);
  return y;
}

double cost(const ControlProblem& p, std::span<const double> x,
            std::span<const double> u) {
  return p.cost_fn(x, u);
}

bool in_target(const ControlProblem& p, std::span<const double> x) {
  return p.target.contains(x);
}

bool admissible(const ControlProblem& p, std::span<const double> x) {
  if (!p.domain.contains(x)) return false;
  if (p.mask && !p.mask->admissible_point(x[0], x[1])) return false;
  return true;
}

double delta_estimate(const ControlProblem& p, const NodeSet& nodes) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nodes.size(); ++i) {
    const auto x = nodes.point(i);
    if (p.target.contains(x)) continue;
    for (const auto& u : p.controls) {
      best = std::min(best, p.cost_fn(x, u));
    }
  }
  return best;
}

double pendulum_acceleration(double phi, double phidot, double u,
                             double mass_cart, double mass_pole, double length,
                             double gravity) {
  const double mr = mass_pole / (mass_pole + mass_cart);
  const double c = std::cos(phi);
  const double numer = gravity / length * std::sin(phi) -
                       0.5 * mr * phidot * phidot * std::sin(2.0 * phi) -
                       mr / (mass_pole * length) * c * u;
  const double denom = 4.0 / 3.0 - mr * c * c;
  return numer / denom;
}

void magnetic_wheel_rhs(std::span<const double> x, double u,
                        std::span<double> dx, double s0, double l_n,
                        double mass, double mu, double resistance, double l_s,
                        double gravity) {
  const double coil = 2.0 * l_n * s0;
  const double s = x[0];
  const double v = x[1];
  const double j = x[2];
  dx[0] = v;
  dx[1] = coil * j * j / (4.0 * mass * s * s) - mu * gravity;
  dx[2] = (-resistance * j + coil / (2.0 * s * s) * j * v + u) /
          (l_s + coil / (2.0 * s));
}

ControlProblem make_problem(const std::string& name,
                            const nlohmann::json& overrides,
                            std::shared_ptr<const ObstacleMask> mask) {
  if (mask && name != "shortest_path") {
    throw ConfigError("obstacle masks only apply to shortest_path");
  }
  ControlProblem p;
  if (name == "linear1d") {
    p = make_linear1d(overrides);
  } else if (name == "shortest_path") {
    p = make_shortest_path(overrides, std::move(mask));
  } else if (name == "pendulum") {
    p = make_pendulum(overrides);
  } else if (name == "magnetic_wheel") {
    p = make_magnetic_wheel(overrides);
  } else {
    throw ConfigError("unknown problem \"" + name +
                      "\" (expected linear1d, shortest_path, pendulum or "
                      "magnetic_wheel)");
  }
  validate(p);
  return p;
}

nlohmann::json problem_defaults(const std::string& name) {
  // Kernel and grid hints merged underneath the user's run configuration.
  if (name == "linear1d") {
    return {{"kernel", {{"type", "wendland42"}, {"c_sigma", 0.1}}}};
  }
  if (name == "shortest_path") {
    return {{"kernel", {{"type", "wendland42"}, {"sigma", 10.0}}}};
  }
  if (name == "pendulum") {
    return {{"kernel", {{"type", "wendland42"}, {"overlap_count", 20}}},
            {"grid_counts", {100, 100}}};
  }
  if (name == "magnetic_wheel") {
    return {{"kernel", {{"type", "wendland42"}, {"sigma", 11.2}}},
            {"grid_counts", {30, 30, 30}}};
  }
  throw ConfigError("unknown problem \"" + name + "\"");
}

}  // namespace shepvi
