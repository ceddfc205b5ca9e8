#include "shepvi/io.hpp"

#include <cmath>
#include <cstdio>

#include "shepvi/errors.hpp"

namespace shepvi {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::cell(std::string_view text) {
  if (row_started_) out_.put(',');
  out_.write(text.data(), static_cast<std::streamsize>(text.size()));
  row_started_ = true;
}

void CsvWriter::cell(double v) { cell(format_double(v)); }

void CsvWriter::cell(std::int64_t v) { cell(std::to_string(v)); }

void CsvWriter::end_row() {
  out_.put('\n');
  row_started_ = false;
}

void CsvWriter::close() {
  out_.flush();
  if (!out_) throw IoError("failed writing " + path_.string());
  out_.close();
}

void write_value_csv(const std::filesystem::path& path, const NodeSet& nodes,
                     const ValueVector& vhat, std::span<const double> value) {
  CsvWriter w(path);
  for (int a = 0; a < nodes.dim(); ++a) w.cell("x" + std::to_string(a));
  w.cell("vhat");
  w.cell("V");
  w.end_row();
  for (int i = 0; i < nodes.size(); ++i) {
    const auto x = nodes.point(i);
    for (double c : x) w.cell(c);
    w.cell(vhat[static_cast<std::size_t>(i)]);
    w.cell(value[static_cast<std::size_t>(i)]);
    w.end_row();
  }
  w.close();
}

void write_report_csv(const std::filesystem::path& path,
                      const SolveReport& report) {
  CsvWriter w(path);
  w.cell("iteration");
  w.cell("residual");
  w.end_row();
  for (std::size_t i = 0; i < report.residuals.size(); ++i) {
    w.cell(static_cast<std::int64_t>(i + 1));
    w.cell(report.residuals[i]);
    w.end_row();
  }
  w.close();
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const ControlProblem& problem,
                          const Trajectory& traj) {
  const int dim = problem.dim;
  const int cdim =
      problem.controls.empty() ? 0 : static_cast<int>(problem.controls[0].size());
  CsvWriter w(path);
  w.cell("step");
  for (int a = 0; a < dim; ++a) w.cell("x" + std::to_string(a));
  w.cell("V");
  for (int a = 0; a < cdim; ++a) w.cell("u" + std::to_string(a));
  w.cell("control_index");
  w.cell("stage_cost");
  w.cell("residual_e");
  w.end_row();

  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    w.cell(static_cast<std::int64_t>(s));
    for (double c : traj.states[s]) w.cell(c);
    w.cell(traj.values[s]);
    if (s < traj.controls.size()) {
      for (double c : traj.controls[s]) w.cell(c);
      w.cell(traj.control_index[s]);
      w.cell(traj.costs[s]);
      w.cell(traj.residuals[s]);
    } else {
      for (int a = 0; a < cdim + 3; ++a) w.empty_cell();
    }
    w.end_row();
  }
  w.close();
}

void write_residual_csv(const std::filesystem::path& path,
                        std::span<const double> points, int count, int dim,
                        const ResidualField& field) {
  CsvWriter w(path);
  for (int a = 0; a < dim; ++a) w.cell("x" + std::to_string(a));
  w.cell("e");
  w.cell("c_tilde");
  w.cell("in_R_eta");
  w.end_row();
  for (int i = 0; i < count; ++i) {
    for (int a = 0; a < dim; ++a) {
      w.cell(points[static_cast<std::size_t>(i) * dim + a]);
    }
    const auto idx = static_cast<std::size_t>(i);
    w.cell(field.e[idx]);
    w.cell(field.c_tilde[idx]);
    w.cell(static_cast<std::int64_t>(field.in_R[idx]));
    w.end_row();
  }
  w.close();
}

void write_decay_csv(const std::filesystem::path& path,
                     const DecayReport& report, const Trajectory& traj) {
  CsvWriter w(path);
  w.cell("eta");
  w.cell("holds");
  w.cell("first_violation");
  w.cell("exit_index");
  w.cell("decay_held_until_exit");
  w.cell("steps");
  w.cell("termination");
  w.end_row();
  w.cell(report.eta);
  w.cell(static_cast<std::int64_t>(report.holds ? 1 : 0));
  w.cell(report.first_violation);
  w.cell(report.exit_index);
  w.cell(static_cast<std::int64_t>(report.decay_held_until_exit ? 1 : 0));
  w.cell(traj.steps());
  w.cell(termination_name(traj.reason));
  w.end_row();
  w.close();
}

void write_convergence_csv(const std::filesystem::path& path,
                           std::span<const StudyRow> rows) {
  CsvWriter w(path);
  w.cell("k");
  w.cell("n");
  w.cell("h");
  w.cell("sigma");
  w.cell("iterations");
  w.cell("converged");
  w.cell("err_sup");
  w.cell("err_rel");
  w.cell("compared_nodes");
  w.end_row();
  for (const auto& r : rows) {
    w.cell(r.k);
    w.cell(r.n);
    w.cell(r.h);
    w.cell(r.sigma);
    w.cell(r.iterations);
    w.cell(static_cast<std::int64_t>(r.converged ? 1 : 0));
    w.cell(r.err_sup);
    w.cell(r.err_rel);
    w.cell(r.compared_nodes);
    w.end_row();
  }
  w.close();
}

void write_compare_csv(const std::filesystem::path& path,
                       std::span<const CompareRow> rows) {
  CsvWriter w(path);
  w.cell("iteration");
  w.cell("shepard_residual");
  w.cell("interp_residual");
  w.cell("interp_min");
  w.cell("interp_max");
  w.end_row();
  for (const auto& r : rows) {
    w.cell(r.iteration);
    if (r.has_shepard) {
      w.cell(r.shepard_residual);
    } else {
      w.empty_cell();
    }
    if (r.has_interp) {
      w.cell(r.interp_residual);
      w.cell(r.interp_min);
      w.cell(r.interp_max);
    } else {
      for (int a = 0; a < 3; ++a) w.empty_cell();
    }
    w.end_row();
  }
  w.close();
}

const char* termination_name(Trajectory::Termination t) {
  switch (t) {
    case Trajectory::Termination::target:
      return "target";
    case Trajectory::Termination::dead_end:
      return "dead_end";
    case Trajectory::Termination::left_stabilizable:
      return "left_stabilizable";
    default:
      return "max_steps";
  }
}

}  // namespace shepvi
