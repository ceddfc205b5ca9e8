#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shepvi/feedback.hpp"
#include "shepvi/geometry.hpp"
#include "shepvi/problems.hpp"
#include "shepvi/solver.hpp"

namespace shepvi {

// 17 significant digits, enough to round-trip any double; infinities and
// NaNs become "inf", "-inf", "nan".  All CSV output goes through this so
// repeated runs produce byte-identical files.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  ~CsvWriter();

  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void cell(std::string_view text);
  void cell(double v);
  void cell(std::int64_t v);
  void cell(int v) { cell(static_cast<std::int64_t>(v)); }
  void empty_cell() { cell(std::string_view{}); }
  void end_row();

  // Flushes and reports failures; the destructor closes silently.
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  bool row_started_ = false;
};

void write_value_csv(const std::filesystem::path& path, const NodeSet& nodes,
                     const ValueVector& vhat, std::span<const double> value);
void write_report_csv(const std::filesystem::path& path,
                      const SolveReport& report);
void write_trajectory_csv(const std::filesystem::path& path,
                          const ControlProblem& problem,
                          const Trajectory& traj);
void write_residual_csv(const std::filesystem::path& path,
                        std::span<const double> points, int count, int dim,
                        const ResidualField& field);
void write_decay_csv(const std::filesystem::path& path,
                     const DecayReport& report, const Trajectory& traj);

struct StudyRow {
  int k = 0;
  int n = 0;
  double h = 0.0;
  double sigma = 0.0;
  int iterations = 0;
  bool converged = false;
  double err_sup = 0.0;
  double err_rel = 0.0;
  int compared_nodes = 0;
};
void write_convergence_csv(const std::filesystem::path& path,
                           std::span<const StudyRow> rows);

struct CompareRow {
  int iteration = 0;
  bool has_shepard = false;
  double shepard_residual = 0.0;
  bool has_interp = false;
  double interp_residual = 0.0;
  double interp_min = 0.0;
  double interp_max = 0.0;
};
void write_compare_csv(const std::filesystem::path& path,
                       std::span<const CompareRow> rows);

const char* termination_name(Trajectory::Termination t);

}  // namespace shepvi
