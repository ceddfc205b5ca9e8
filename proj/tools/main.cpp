#include <cctype>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "shepvi/config.hpp"
#include "shepvi/errors.hpp"
#include "shepvi/run.hpp"

namespace {

nlohmann::json load_raw_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw shepvi::IoError("cannot read configuration file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw shepvi::ParseError("malformed JSON in " + path,
                             e.byte > 0 ? e.byte - 1 : 0);
  }
}

std::vector<double> parse_x0(const std::string& text) {
  std::vector<double> out;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const auto comma = text.find(',', begin);
    const std::string part = text.substr(
        begin, comma == std::string::npos ? std::string::npos : comma - begin);
    std::size_t used = 0;
    double v = 0.0;
    bool ok = !part.empty();
    if (ok) {
      try {
        v = std::stod(part, &used);
      } catch (const std::exception&) {
        ok = false;
      }
    }
    while (ok && used < part.size()) {
      if (!std::isspace(static_cast<unsigned char>(part[used]))) ok = false;
      ++used;
    }
    if (!ok) {
      throw shepvi::ConfigError("--x0 entry \"" + part + "\" is not a number");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "JSON configuration file")
      ->required();
  cmd->add_option("--set", args.sets,
                  "Override one configuration entry, dotted.path=value "
                  "(repeatable)");
}

shepvi::RunConfig resolve(const CommonArgs& args) {
  nlohmann::json raw = load_raw_config(args.config_path);
  for (const auto& s : args.sets) shepvi::apply_override(raw, s);
  return shepvi::parse_config(raw);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meshfree value iteration for discrete-time optimal control"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string x0_text;
  int steps = 1000;

  auto* solve = app.add_subcommand(
      "solve", "Compute the value function; writes value.csv and report.csv");
  add_common(solve, args);

  auto* simulate = app.add_subcommand(
      "simulate",
      "Solve, then run the greedy closed loop from --x0; writes "
      "trajectory.csv, residual.csv and decay.csv");
  add_common(simulate, args);
  simulate->add_option("--x0", x0_text, "Start state, comma separated")
      ->required();
  simulate->add_option("--steps", steps, "Maximum number of control steps");

  auto* residual = app.add_subcommand(
      "residual-map",
      "Solve, then evaluate the one-step residual at every node; writes "
      "residual.csv");
  add_common(residual, args);

  auto* study = app.add_subcommand(
      "convergence-study",
      "Solve over study.k_list and compare against a reference; writes "
      "convergence.csv");
  add_common(study, args);

  auto* compare = app.add_subcommand(
      "compare-interpolation",
      "Iterate through the Shepard operator and through radial "
      "interpolation side by side; writes compare.csv");
  add_common(compare, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) {
      shepvi::run_solve(resolve(args), std::cout);
    } else if (*simulate) {
      if (steps < 1) throw shepvi::ConfigError("--steps must be >= 1");
      const auto x0 = parse_x0(x0_text);
      shepvi::run_simulate(resolve(args), x0, steps, std::cout);
    } else if (*residual) {
      shepvi::run_residual_map(resolve(args), std::cout);
    } else if (*study) {
      shepvi::run_convergence_study(resolve(args), std::cout);
    } else if (*compare) {
      shepvi::run_compare_interpolation(resolve(args), std::cout);
    }
  } catch (const shepvi::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const shepvi::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
