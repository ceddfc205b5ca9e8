#include "shepvi/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "shepvi/errors.hpp"
#include "shepvi/io.hpp"
#include "shepvi/pgm.hpp"

namespace shepvi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<int> resolve_grid_counts(const RunConfig& cfg,
                                     const ControlProblem& problem,
                                     const ObstacleMask* mask) {
  if (cfg.grid_counts) {
    if (static_cast<int>(cfg.grid_counts->size()) != problem.dim) {
      throw ConfigError("grid.counts must have one entry per state dimension");
    }
    return *cfg.grid_counts;
  }
  if (cfg.problem_name == "linear1d") {
    int k = 64;
    if (auto it = cfg.problem_overrides.find("k");
        it != cfg.problem_overrides.end() && it->is_number_integer()) {
      k = it->get<int>();
    }
    return {k + 1};
  }
  if (cfg.problem_name == "shortest_path") {
    if (!mask) {
      throw ConfigError("shortest_path needs grid.counts or an obstacle map");
    }
    return {mask->width(), mask->height()};
  }
  const auto defaults = problem_defaults(cfg.problem_name);
  std::vector<int> counts;
  for (const auto& e : defaults.at("grid_counts")) counts.push_back(e.get<int>());
  return counts;
}

// Piecewise-linear value iteration on a dense 1D grid, used as the
// reference solution for the one dimensional problem.  This shares nothing
// with the Shepard pipeline except the problem definition itself.
std::vector<double> linear1d_reference(const ControlProblem& p,
                                       std::span<const double> points,
                                       int count, double floor) {
  if (p.dim != 1) {
    throw ConfigError("the dense 1D reference needs a one dimensional problem");
  }
  const double lo = p.domain.lower(0);
  const double hi = p.domain.upper(0);
  const int n = 20001;
  const double dx = (hi - lo) / (n - 1);

  auto vbar = [&](const std::vector<double>& v, double y) -> double {
    const double yv[1] = {y};
    if (p.target.contains(yv)) return 1.0;
    if (!(y >= lo && y <= hi)) return 0.0;
    const double t = (y - lo) / dx;
    const int i0 = std::min(static_cast<int>(t), n - 2);
    const double w = t - i0;
    return (1.0 - w) * v[static_cast<std::size_t>(i0)] +
           w * v[static_cast<std::size_t>(i0) + 1];
  };

  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  std::vector<double> next(static_cast<std::size_t>(n));
  for (int pass = 0; pass < 500; ++pass) {
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = lo + i * dx;
      const double xv[1] = {x};
      double best;
      if (p.target.contains(xv)) {
        best = 1.0;
      } else {
        best = 0.0;
        for (const auto& u : p.controls) {
          double y;
          p.step_fn(xv, u, {&y, 1});
          best = std::max(best, std::exp(-p.cost_fn(xv, u)) * vbar(v, y));
        }
      }
      next[static_cast<std::size_t>(i)] = best;
      delta = std::max(delta, std::fabs(best - v[static_cast<std::size_t>(i)]));
    }
    v.swap(next);
    if (delta <= 1e-13) break;
  }

  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double vh = vbar(v, points[static_cast<std::size_t>(i)]);
    out[static_cast<std::size_t>(i)] = vh <= floor ? kInf : -std::log(vh);
  }
  return out;
}

// Shepard extension of a converged coefficient vector, as untransformed
// values at arbitrary points.
std::vector<double> extension_values(const NodeSet& nodes,
                                     const ShapeFunction& shape,
                                     const ValueVector& vhat,
                                     std::span<const double> points, int count,
                                     double floor) {
  const auto ext = shepard_apply(nodes, shape, vhat, points, count);
  return to_value(ext, floor);
}

SolveArtifacts finish_solve(Instance inst, const RunConfig& cfg) {
  TransitionTable table =
      assemble_transitions(inst.problem, inst.nodes, inst.shape);
  auto [vhat, report] = value_iteration(table, cfg.solver);
  std::vector<double> value = to_value(vhat, cfg.floor);
  return SolveArtifacts{std::move(inst), std::move(table), std::move(vhat),
                        std::move(value), std::move(report)};
}

// Convergence studies lean on the contraction factor exp(-delta), so a
// degenerate stage cost is rejected before any member is solved.
SolveArtifacts solve_for_study(const RunConfig& cfg) {
  Instance inst = build_instance(cfg);
  if (!(inst.delta > 0.0)) {
    throw ConfigError(
        "the study needs a stage cost bounded below by a positive constant "
        "away from the target (computed delta = " +
        fmt(inst.delta) + ")");
  }
  return finish_solve(std::move(inst), cfg);
}

struct ReferenceData {
  std::vector<double> coords;
  int dim = 0;
  ValueVector vhat;
  ShapeKind kind = ShapeKind::wendland42;
  double sigma = 0.0;
};

std::filesystem::path reference_cache_path(const RunConfig& ref_cfg) {
  nlohmann::json key;
  key["problem"] = ref_cfg.problem_overrides;
  key["problem"]["name"] = ref_cfg.problem_name;
  if (ref_cfg.grid_counts) key["grid"] = *ref_cfg.grid_counts;
  key["kernel"] = ref_cfg.canonical.value("kernel", nlohmann::json::object());
  key["solver"] = {{"tol", ref_cfg.solver.tol},
                   {"max_iter", ref_cfg.solver.max_iter}};
  if (ref_cfg.map) key["map"] = ref_cfg.map->path.string();
  const auto h = std::hash<std::string>{}(key.dump());
  char name[32];
  std::snprintf(name, sizeof name, "ref_%016zx.json", h);
  return ref_cfg.output_dir / "cache" / name;
}

ReferenceData solve_reference(const RunConfig& ref_cfg, std::ostream& out) {
  const auto cache = reference_cache_path(ref_cfg);
  if (std::ifstream in(cache, std::ios::binary); in) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
      ReferenceData data;
      data.dim = j.at("dim").get<int>();
      data.coords = j.at("coords").get<std::vector<double>>();
      data.vhat = j.at("vhat").get<std::vector<double>>();
      data.sigma = j.at("sigma").get<double>();
      data.kind = j.at("kind").get<std::string>() == "gaussian"
                      ? ShapeKind::gaussian
                      : ShapeKind::wendland42;
      out << "reference: reloaded from " << cache.string() << "\n";
      return data;
    } catch (const nlohmann::json::exception&) {
      out << "reference: cache " << cache.string()
          << " is unreadable, resolving\n";
    }
  }

  SolveArtifacts art = solve_for_study(ref_cfg);
  if (!art.report.converged) {
    throw NumericError("the reference solve did not converge; raise "
                       "solver.max_iter or loosen solver.tol");
  }
  ReferenceData data;
  data.dim = art.instance.nodes.dim();
  data.coords.assign(art.instance.nodes.coords().begin(),
                     art.instance.nodes.coords().end());
  data.vhat = art.vhat;
  data.kind = art.instance.shape.kind();
  data.sigma = art.instance.shape.sigma();

  nlohmann::json j;
  j["dim"] = data.dim;
  j["coords"] = data.coords;
  j["vhat"] = data.vhat;
  j["sigma"] = data.sigma;
  j["kind"] = data.kind == ShapeKind::gaussian ? "gaussian" : "wendland42";
  std::error_code ec;
  std::filesystem::create_directories(cache.parent_path(), ec);
  std::ofstream cache_out(cache, std::ios::binary | std::ios::trunc);
  if (cache_out) {
    cache_out << j.dump();
    out << "reference: cached to " << cache.string() << "\n";
  }
  return data;
}

RunConfig derive_member(const RunConfig& base, int k) {
  RunConfig member = base;
  if (base.problem_name == "linear1d") {
    member.problem_overrides["k"] = k;
    member.grid_counts = std::vector<int>{k + 1};
  } else {
    // Interpret k as the per-axis node count.
    int dim = 1;
    if (base.grid_counts) {
      dim = static_cast<int>(base.grid_counts->size());
    } else {
      const auto defaults = problem_defaults(base.problem_name);
      if (defaults.contains("grid_counts")) {
        dim = static_cast<int>(defaults.at("grid_counts").size());
      } else if (base.problem_name == "shortest_path") {
        dim = 2;
      }
    }
    member.grid_counts = std::vector<int>(static_cast<std::size_t>(dim), k);
  }
  return member;
}

void print_solve_summary(std::ostream& out, const SolveArtifacts& art) {
  const auto& inst = art.instance;
  out << "problem: " << inst.problem.name << "\n";
  out << "nodes: " << inst.nodes.size()
      << "  controls: " << inst.problem.controls.size()
      << "  dim: " << inst.problem.dim << "\n";
  out << "fill distance h: " << fmt(inst.fill)
      << "  separation q_X: " << fmt(inst.separation) << "\n";
  out << "sigma: " << fmt(inst.shape.sigma())
      << "  support radius: " << fmt(inst.shape.support_radius()) << "\n";
  out << "delta (min off-target stage cost): " << fmt(inst.delta)
      << "  contraction bound L: " << fmt(art.report.contraction_bound)
      << "\n";
  if (!(inst.delta > 0.0)) {
    out << "warning: the stage cost vanishes off the target at some node, "
           "so no contraction factor below 1 is guaranteed\n";
  }
  out << "iterations: " << art.report.iterations
      << "  converged: " << (art.report.converged ? "yes" : "no") << "\n";
  if (!art.report.residuals.empty()) {
    out << "final residual: " << fmt(art.report.residuals.back()) << "\n";
  }
  if (art.report.uncovered_interior > 0) {
    out << "warning: " << art.report.uncovered_interior
        << " interior images are covered by no node (treated as value 0)\n";
  }
  if (art.report.degenerate) {
    out << "warning: no node or image reaches the target; the value "
           "function is identically zero\n";
  }
  out << "wall time: " << fmt(art.report.wall_time_seconds) << " s\n";
}

}  // namespace

Instance build_instance(const RunConfig& cfg) {
  std::shared_ptr<const ObstacleMask> mask;
  if (cfg.map) {
    mask = std::make_shared<const ObstacleMask>(
        load_pgm_mask(cfg.map->path, cfg.map->geo));
  }
  ControlProblem problem =
      make_problem(cfg.problem_name, cfg.problem_overrides, mask);
  const auto counts = resolve_grid_counts(cfg, problem, mask.get());
  NodeSet nodes = grid_nodes(problem.domain, counts, problem.mask);

  const double fill = fill_distance(nodes, problem.domain);
  const double separation =
      nodes.size() >= 2 ? separation_distance(nodes) : 0.0;
  ShapeFunction shape = make_shape(cfg.kernel, nodes, fill);

  const double delta = delta_estimate(problem, nodes);
  return Instance{std::move(problem), std::move(nodes), shape,
                  fill,               separation,       delta};
}

SolveArtifacts solve_instance(const RunConfig& cfg) {
  return finish_solve(build_instance(cfg), cfg);
}

void run_solve(const RunConfig& cfg, std::ostream& out) {
  SolveArtifacts art = solve_instance(cfg);
  print_solve_summary(out, art);

  const auto value_path = cfg.output_dir / "value.csv";
  const auto report_path = cfg.output_dir / "report.csv";
  write_value_csv(value_path, art.instance.nodes, art.vhat, art.value);
  write_report_csv(report_path, art.report);
  out << "wrote " << value_path.string() << "\n";
  out << "wrote " << report_path.string() << "\n";
}

void run_simulate(const RunConfig& cfg, std::span<const double> x0,
                  int max_steps, std::ostream& out) {
  SolveArtifacts art = solve_instance(cfg);
  print_solve_summary(out, art);

  if (static_cast<int>(x0.size()) != art.instance.problem.dim) {
    throw ConfigError("x0 must have one entry per state dimension");
  }

  FeedbackPolicy policy(art.instance.problem, art.instance.nodes,
                        art.instance.shape, art.vhat, art.report.converged,
                        cfg.floor);
  Trajectory traj = policy.closed_loop(x0, max_steps);

  std::vector<double> visited;
  for (const auto& s : traj.states) {
    visited.insert(visited.end(), s.begin(), s.end());
  }
  const int visited_count = static_cast<int>(traj.states.size());
  ResidualField field =
      policy.bellman_residual(visited, visited_count, cfg.eta);
  DecayReport decay = check_decay(traj, cfg.eta);

  const auto traj_path = cfg.output_dir / "trajectory.csv";
  const auto residual_path = cfg.output_dir / "residual.csv";
  const auto decay_path = cfg.output_dir / "decay.csv";
  write_trajectory_csv(traj_path, art.instance.problem, traj);
  write_residual_csv(residual_path, visited, visited_count,
                     art.instance.problem.dim, field);
  write_decay_csv(decay_path, decay, traj);

  out << "steps: " << traj.steps()
      << "  termination: " << termination_name(traj.reason) << "\n";
  out << "V(x0): " << fmt(traj.values.front())
      << "  V(end): " << fmt(traj.values.back()) << "\n";
  if (decay.exit_index >= 0) {
    out << "trajectory leaves R_eta (eta = " << fmt(decay.eta) << ") at step "
        << decay.exit_index << "\n";
  } else {
    out << "trajectory stays in R_eta (eta = " << fmt(decay.eta) << ")\n";
  }
  if (decay.holds) {
    out << "decay inequality holds on every prefix inside R_eta\n";
  } else {
    out << "decay inequality first fails at step " << decay.first_violation
        << "\n";
  }
  out << "wrote " << traj_path.string() << "\n";
  out << "wrote " << residual_path.string() << "\n";
  out << "wrote " << decay_path.string() << "\n";
}

void run_residual_map(const RunConfig& cfg, std::ostream& out) {
  SolveArtifacts art = solve_instance(cfg);
  print_solve_summary(out, art);

  FeedbackPolicy policy(art.instance.problem, art.instance.nodes,
                        art.instance.shape, art.vhat, art.report.converged,
                        cfg.floor);
  const auto& nodes = art.instance.nodes;
  ResidualField field =
      policy.bellman_residual(nodes.coords(), nodes.size(), cfg.eta);

  std::int64_t inside = 0, infinite = 0;
  for (std::size_t i = 0; i < field.e.size(); ++i) {
    inside += field.in_R[i];
    infinite += std::isinf(field.e[i]) ? 1 : 0;
  }
  out << "nodes in R_eta (eta = " << fmt(field.eta) << "): " << inside << " / "
      << nodes.size() << "  (infinite residual: " << infinite << ")\n";

  const auto residual_path = cfg.output_dir / "residual.csv";
  write_residual_csv(residual_path, nodes.coords(), nodes.size(), nodes.dim(),
                     field);
  out << "wrote " << residual_path.string() << "\n";
}

void run_convergence_study(const RunConfig& cfg, std::ostream& out) {
  const auto& k_list = cfg.study.k_list;
  if (k_list.size() < 3) {
    throw ConfigError("study.k_list needs at least three entries");
  }
  if (!std::is_sorted(k_list.begin(), k_list.end()) ||
      std::adjacent_find(k_list.begin(), k_list.end()) != k_list.end()) {
    throw ConfigError("study.k_list must be strictly ascending");
  }

  std::string reference = cfg.study.reference;
  if (reference.empty()) {
    reference = cfg.problem_name == "linear1d" ? "oracle" : "finest";
  }
  if (reference == "oracle" && cfg.problem_name != "linear1d") {
    throw ConfigError(
        "study.reference \"oracle\" is only available for linear1d");
  }

  std::vector<int> members(k_list.begin(), k_list.end());
  std::optional<ReferenceData> finest;
  if (reference == "finest") {
    members.pop_back();
    out << "reference: finest member (k = " << k_list.back() << ")\n";
    finest = solve_reference(derive_member(cfg, k_list.back()), out);
  } else {
    out << "reference: dense 1D backward induction per member target\n";
  }

  std::vector<StudyRow> rows;
  for (int k : members) {
    const RunConfig mc = derive_member(cfg, k);
    SolveArtifacts art = solve_for_study(mc);
    const auto& nodes = art.instance.nodes;

    const auto member_values =
        extension_values(nodes, art.instance.shape, art.vhat, nodes.coords(),
                         nodes.size(), cfg.floor);
    std::vector<double> ref_values;
    if (finest) {
      NodeSet ref_nodes(finest->coords, finest->dim);
      const ShapeFunction ref_shape(finest->kind, finest->sigma);
      ref_values = extension_values(ref_nodes, ref_shape, finest->vhat,
                                    nodes.coords(), nodes.size(), cfg.floor);
    } else {
      ref_values = linear1d_reference(art.instance.problem, nodes.coords(),
                                      nodes.size(), cfg.floor);
    }

    StudyRow row;
    row.k = k;
    row.n = nodes.size();
    row.h = art.instance.fill;
    row.sigma = art.instance.shape.sigma();
    row.iterations = art.report.iterations;
    row.converged = art.report.converged;
    double err = 0.0, scale = 0.0;
    int compared = 0;
    for (std::size_t i = 0; i < member_values.size(); ++i) {
      if (!std::isfinite(member_values[i]) || !std::isfinite(ref_values[i])) {
        continue;
      }
      err = std::max(err, std::fabs(member_values[i] - ref_values[i]));
      scale = std::max(scale, std::fabs(ref_values[i]));
      ++compared;
    }
    row.err_sup = err;
    row.err_rel = scale > 0.0 ? err / scale : 0.0;
    row.compared_nodes = compared;
    rows.push_back(row);

    out << "k = " << k << ": n = " << row.n << ", h = " << fmt(row.h)
        << ", sigma = " << fmt(row.sigma) << ", err_sup = " << fmt(row.err_sup)
        << ", err_rel = " << fmt(row.err_rel)
        << (row.converged ? "" : "  [not converged]") << "\n";
  }

  const auto path = cfg.output_dir / "convergence.csv";
  write_convergence_csv(path, rows);
  out << "wrote " << path.string() << "\n";
}

void run_compare_interpolation(const RunConfig& cfg, std::ostream& out) {
  SolveArtifacts art = solve_instance(cfg);
  print_solve_summary(out, art);

  const auto& table = art.table;
  const auto& nodes = art.instance.nodes;

  std::vector<double> interior_coords;
  interior_coords.reserve(static_cast<std::size_t>(table.interior_count) *
                          table.dim);
  const std::int64_t nm = static_cast<std::int64_t>(table.n) * table.m;
  for (std::int64_t e = 0; e < nm; ++e) {
    if (table.image_class[static_cast<std::size_t>(e)] != ImageClass::interior)
      continue;
    interior_coords.insert(
        interior_coords.end(), table.images.begin() + e * table.dim,
        table.images.begin() + (e + 1) * table.dim);
  }

  std::vector<CompareRow> rows;
  bool diverged = false;
  bool interp_converged = false;
  int interp_iters = 0;
  std::string interp_note;
  try {
    const RadialInterpolant interpolant(nodes, art.instance.shape);

    ValueVector v(static_cast<std::size_t>(table.n), 0.0);
    for (int it = 0; it < cfg.solver.max_iter; ++it) {
      const auto at_images = interpolant.evaluate(
          v, interior_coords, static_cast<int>(table.interior_count));
      ValueVector next(v.size());
      for (int i = 0; i < table.n; ++i) {
        if (table.node_in_target[static_cast<std::size_t>(i)]) {
          next[static_cast<std::size_t>(i)] = 1.0;
          continue;
        }
        double best = 0.0;
        const std::int64_t base = static_cast<std::int64_t>(i) * table.m;
        for (int j = 0; j < table.m; ++j) {
          const std::int64_t e = base + j;
          double vbar;
          switch (table.image_class[static_cast<std::size_t>(e)]) {
            case ImageClass::target:
              vbar = 1.0;
              break;
            case ImageClass::outside:
              continue;
            default:
              vbar = at_images[static_cast<std::size_t>(
                  table.interior_row[static_cast<std::size_t>(e)])];
          }
          best = std::max(
              best, table.weights[static_cast<std::size_t>(e)] * vbar);
        }
        next[static_cast<std::size_t>(i)] = best;
      }

      double delta = 0.0, vmin = next[0], vmax = next[0];
      for (std::size_t i = 0; i < next.size(); ++i) {
        delta = std::max(delta, std::fabs(next[i] - v[i]));
        vmin = std::min(vmin, next[i]);
        vmax = std::max(vmax, next[i]);
      }
      v = std::move(next);
      ++interp_iters;

      CompareRow row;
      row.iteration = interp_iters;
      if (static_cast<std::size_t>(interp_iters) <=
          art.report.residuals.size()) {
        row.has_shepard = true;
        row.shepard_residual =
            art.report.residuals[static_cast<std::size_t>(interp_iters) - 1];
      }
      row.has_interp = true;
      row.interp_residual = delta;
      row.interp_min = vmin;
      row.interp_max = vmax;
      rows.push_back(row);

      if (!std::isfinite(delta) || std::max(std::fabs(vmin), std::fabs(vmax)) >
                                       2.0) {
        diverged = true;
        break;
      }
      if (delta <= cfg.solver.tol) {
        interp_converged = true;
        break;
      }
    }
  } catch (const ConditioningError& e) {
    interp_note = e.what();
  }

  // Any Shepard residuals beyond the interpolation run still get rows.
  for (std::size_t i = rows.size(); i < art.report.residuals.size(); ++i) {
    CompareRow row;
    row.iteration = static_cast<int>(i) + 1;
    row.has_shepard = true;
    row.shepard_residual = art.report.residuals[i];
    rows.push_back(row);
  }

  out << "shepard route: " << art.report.iterations << " iterations, "
      << (art.report.converged ? "converged" : "not converged") << "\n";
  if (!interp_note.empty()) {
    out << "interpolation route: aborted (" << interp_note << ")\n";
  } else if (diverged) {
    out << "interpolation route: diverged at iteration " << interp_iters
        << " (iterates left [-2,2])\n";
  } else if (interp_converged) {
    out << "interpolation route: converged in " << interp_iters
        << " iterations\n";
  } else {
    out << "interpolation route: no convergence within " << interp_iters
        << " iterations\n";
  }

  const auto path = cfg.output_dir / "compare.csv";
  write_compare_csv(path, rows);
  out << "wrote " << path.string() << "\n";
}

}  // namespace shepvi
