#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "shepvi/geometry.hpp"
#include "shepvi/io.hpp"
#include "shepvi/problems.hpp"
#include "testutil.hpp"

using namespace shepvi;

TEST_CASE("doubles round-trip through the cell format") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mag(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const double v = std::ldexp(mag(rng), static_cast<int>(rng() % 40) - 20);
    const std::string text = format_double(v);
    CHECK(std::strtod(text.c_str(), nullptr) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("csv writer emits rows with commas and newlines") {
  testutil::TempDir tmp;
  const auto path = tmp.file("cells.csv");
  {
    CsvWriter w(path);
    w.cell("a");
    w.cell("b");
    w.end_row();
    w.cell(1.5);
    w.cell(std::int64_t{-7});
    w.end_row();
    w.cell("x");
    w.empty_cell();
    w.cell("z");
    w.end_row();
    w.close();
  }
  CHECK(testutil::read_file(path) == "a,b\n1.5,-7\nx,,z\n");
}

TEST_CASE("value table schema and byte determinism") {
  const NodeSet nodes({0.0, 0.5, 1.0}, 1);
  const ValueVector vhat = {1.0, std::exp(-0.4), 1e-30};
  const std::vector<double> value = {0.0, 0.4,
                                     std::numeric_limits<double>::infinity()};
  testutil::TempDir tmp;
  const auto a = tmp.file("a.csv");
  const auto b = tmp.file("b.csv");
  write_value_csv(a, nodes, vhat, value);
  write_value_csv(b, nodes, vhat, value);
  const std::string text = testutil::read_file(a);
  CHECK(text == testutil::read_file(b));
  CHECK(text.rfind("x0,vhat,V\n", 0) == 0);
  CHECK(text.find("inf") != std::string::npos);
  CHECK(text.find("0.5," + format_double(std::exp(-0.4)) + ",") !=
        std::string::npos);
}

TEST_CASE("report and convergence tables carry their columns") {
  testutil::TempDir tmp;
  SolveReport report;
  report.iterations = 2;
  report.residuals = {0.25, 0.0};
  report.converged = true;
  const auto rp = tmp.file("report.csv");
  write_report_csv(rp, report);
  const std::string rep = testutil::read_file(rp);
  CHECK(rep.rfind("iteration,residual\n", 0) == 0);
  CHECK(rep.find("\n1,0.25\n") != std::string::npos);
  CHECK(rep.find("\n2,0\n") != std::string::npos);

  StudyRow row;
  row.k = 10;
  row.n = 11;
  row.h = 0.0625;
  row.sigma = 2.0;
  row.iterations = 4;
  row.converged = true;
  row.err_sup = 0.125;
  row.err_rel = 0.25;
  row.compared_nodes = 11;
  const auto cp = tmp.file("conv.csv");
  write_convergence_csv(cp, std::vector<StudyRow>{row});
  const std::string conv = testutil::read_file(cp);
  CHECK(conv ==
        "k,n,h,sigma,iterations,converged,err_sup,err_rel,compared_nodes\n"
        "10,11,0.0625,2,4,1,0.125,0.25,11\n");
}

TEST_CASE("trajectory rows leave unexecuted cells empty") {
  const ControlProblem p = make_problem("linear1d");
  Trajectory traj;
  traj.states = {{0.9}, {0.0}};
  traj.controls = {{0.0}};
  traj.control_index = {10};
  traj.costs = {0.72};
  traj.values = {0.72, 0.0};
  traj.residuals = {0.0};
  traj.reason = Trajectory::Termination::target;

  testutil::TempDir tmp;
  const auto path = tmp.file("traj.csv");
  write_trajectory_csv(path, p, traj);
  const std::string text = testutil::read_file(path);
  CHECK(text.rfind("step,x0,V,u0,control_index,stage_cost,residual_e\n", 0) ==
        0);
  // The terminal state has no executed control: trailing cells stay empty.
  CHECK(text.find("\n1,0,0,,,,\n") != std::string::npos);
}

TEST_CASE("termination reasons have stable names") {
  CHECK(std::string(termination_name(Trajectory::Termination::target)) ==
        "target");
  CHECK(std::string(termination_name(Trajectory::Termination::dead_end)) ==
        "dead_end");
  CHECK(std::string(termination_name(
            Trajectory::Termination::left_stabilizable)) == "left_stabilizable");
  CHECK(std::string(termination_name(Trajectory::Termination::max_steps)) ==
        "max_steps");
}
