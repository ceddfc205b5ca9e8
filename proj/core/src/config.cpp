#include "shepvi/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "shepvi/errors.hpp"
#include "shepvi/problems.hpp"

namespace shepvi {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

const json* get_object(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return nullptr;
  if (!it->is_object()) bad(std::string(key) + " must be a JSON object");
  return &*it;
}

void reject_unknown(const json& j, std::set<std::string> known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      bad("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

double number_or(const json& j, const char* key, double fallback,
                 const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) bad(where + "." + key + " must be a number");
  return it->get<double>();
}

std::vector<double> pair_or(const json& j, const char* key,
                            std::vector<double> fallback,
                            const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() ||
      !(*it)[1].is_number()) {
    bad(where + "." + key + " must be an array of two numbers");
  }
  return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

KernelConfig parse_kernel(const json& merged) {
  reject_unknown(merged, {"type", "sigma", "c_sigma", "overlap_count"},
                 "kernel");
  KernelConfig k;
  if (auto it = merged.find("type"); it != merged.end()) {
    if (!it->is_string()) bad("kernel.type must be a string");
    const auto s = it->get<std::string>();
    if (s == "wendland42") {
      k.kind = ShapeKind::wendland42;
    } else if (s == "gaussian") {
      k.kind = ShapeKind::gaussian;
    } else {
      bad("kernel.type must be \"wendland42\" or \"gaussian\"");
    }
  }
  int sizing = 0;
  if (auto it = merged.find("sigma"); it != merged.end()) {
    if (!it->is_number()) bad("kernel.sigma must be a number");
    k.sigma = it->get<double>();
    if (!(*k.sigma > 0.0) || !std::isfinite(*k.sigma)) {
      bad("kernel.sigma must be positive and finite");
    }
    ++sizing;
  }
  if (auto it = merged.find("c_sigma"); it != merged.end()) {
    if (!it->is_number()) bad("kernel.c_sigma must be a number");
    k.c_sigma = it->get<double>();
    if (!(*k.c_sigma > 0.0) || !std::isfinite(*k.c_sigma)) {
      bad("kernel.c_sigma must be positive and finite");
    }
    ++sizing;
  }
  if (auto it = merged.find("overlap_count"); it != merged.end()) {
    if (!it->is_number_integer()) bad("kernel.overlap_count must be an integer");
    k.overlap_count = it->get<int>();
    if (*k.overlap_count < 1) bad("kernel.overlap_count must be >= 1");
    ++sizing;
  }
  if (sizing != 1) {
    bad("kernel needs exactly one of sigma, c_sigma, overlap_count");
  }
  return k;
}

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) bad("configuration must be a JSON object");
  reject_unknown(j,
                 {"problem", "grid", "map", "kernel", "solver", "feedback",
                  "output", "study", "seed"},
                 "the configuration");

  RunConfig cfg;

  const json* problem = get_object(j, "problem");
  if (!problem) bad("configuration needs a problem section");
  {
    auto it = problem->find("name");
    if (it == problem->end() || !it->is_string()) {
      bad("problem.name must be a string");
    }
    cfg.problem_name = it->get<std::string>();
    cfg.problem_overrides = *problem;
    cfg.problem_overrides.erase("name");
  }
  const json defaults = problem_defaults(cfg.problem_name);

  if (const json* grid = get_object(j, "grid")) {
    reject_unknown(*grid, {"counts"}, "grid");
    auto it = grid->find("counts");
    if (it != grid->end()) {
      if (!it->is_array() || it->empty()) {
        bad("grid.counts must be a nonempty array of integers");
      }
      std::vector<int> counts;
      for (const auto& e : *it) {
        if (!e.is_number_integer() || e.get<int>() < 1) {
          bad("grid.counts entries must be integers >= 1");
        }
        counts.push_back(e.get<int>());
      }
      cfg.grid_counts = std::move(counts);
    }
  }

  if (const json* map = get_object(j, "map")) {
    reject_unknown(*map, {"path", "origin", "pixel_size"}, "map");
    auto it = map->find("path");
    if (it == map->end() || !it->is_string()) bad("map.path must be a string");
    MapConfig m;
    m.path = it->get<std::string>();
    const auto origin = pair_or(*map, "origin", {0.0, 0.0}, "map");
    const auto px = pair_or(*map, "pixel_size", {1.0, 1.0}, "map");
    if (!(px[0] > 0.0) || !(px[1] > 0.0)) {
      bad("map.pixel_size entries must be positive");
    }
    m.geo.origin = {origin[0], origin[1]};
    m.geo.pixel_size = {px[0], px[1]};
    cfg.map = std::move(m);
  }

  {
    json merged = defaults.value("kernel", json::object());
    if (const json* kernel = get_object(j, "kernel")) {
      const bool user_sizes = kernel->contains("sigma") ||
                              kernel->contains("c_sigma") ||
                              kernel->contains("overlap_count");
      if (user_sizes) {
        merged.erase("sigma");
        merged.erase("c_sigma");
        merged.erase("overlap_count");
      }
      for (auto it = kernel->begin(); it != kernel->end(); ++it) {
        merged[it.key()] = it.value();
      }
    }
    cfg.kernel = parse_kernel(merged);
  }

  if (const json* solver = get_object(j, "solver")) {
    reject_unknown(*solver, {"tol", "max_iter"}, "solver");
    cfg.solver.tol = number_or(*solver, "tol", cfg.solver.tol, "solver");
    if (!(cfg.solver.tol > 0.0)) bad("solver.tol must be positive");
    if (auto it = solver->find("max_iter"); it != solver->end()) {
      if (!it->is_number_integer() || it->get<int>() < 0) {
        bad("solver.max_iter must be a nonnegative integer");
      }
      cfg.solver.max_iter = it->get<int>();
    }
  }

  if (const json* feedback = get_object(j, "feedback")) {
    reject_unknown(*feedback, {"eta", "floor"}, "feedback");
    cfg.eta = number_or(*feedback, "eta", cfg.eta, "feedback");
    if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) bad("feedback.eta must lie in (0,1]");
    cfg.floor = number_or(*feedback, "floor", cfg.floor, "feedback");
    if (!(cfg.floor > 0.0 && cfg.floor < 1.0)) {
      bad("feedback.floor must lie in (0,1)");
    }
  }

  if (const json* output = get_object(j, "output")) {
    reject_unknown(*output, {"dir"}, "output");
    auto it = output->find("dir");
    if (it != output->end()) {
      if (!it->is_string() || it->get<std::string>().empty()) {
        bad("output.dir must be a nonempty string");
      }
      cfg.output_dir = it->get<std::string>();
    }
  }

  if (const json* study = get_object(j, "study")) {
    reject_unknown(*study, {"k_list", "reference"}, "study");
    if (auto it = study->find("k_list"); it != study->end()) {
      if (!it->is_array()) bad("study.k_list must be an array of integers");
      for (const auto& e : *it) {
        if (!e.is_number_integer() || e.get<int>() < 1) {
          bad("study.k_list entries must be integers >= 1");
        }
        cfg.study.k_list.push_back(e.get<int>());
      }
    }
    if (auto it = study->find("reference"); it != study->end()) {
      if (!it->is_string()) bad("study.reference must be a string");
      cfg.study.reference = it->get<std::string>();
      if (cfg.study.reference != "oracle" && cfg.study.reference != "finest") {
        bad("study.reference must be \"oracle\" or \"finest\"");
      }
    }
  }

  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_integer() ||
        (it->is_number_integer() && !it->is_number_unsigned() &&
         it->get<std::int64_t>() < 0)) {
      bad("seed must be a nonnegative integer");
    }
    cfg.seed = it->get<std::uint64_t>();
  }

  // Normalized configuration with the kernel defaults materialized;
  // nlohmann::json keeps object keys sorted, so dumping this is canonical.
  json canonical = j;
  canonical["problem"] = cfg.problem_overrides;
  canonical["problem"]["name"] = cfg.problem_name;
  json kernel_json;
  switch (cfg.kernel.kind) {
    case ShapeKind::gaussian:
      kernel_json["type"] = "gaussian";
      break;
    default:
      kernel_json["type"] = "wendland42";
  }
  if (cfg.kernel.sigma) kernel_json["sigma"] = *cfg.kernel.sigma;
  if (cfg.kernel.c_sigma) kernel_json["c_sigma"] = *cfg.kernel.c_sigma;
  if (cfg.kernel.overlap_count) {
    kernel_json["overlap_count"] = *cfg.kernel.overlap_count;
  }
  canonical["kernel"] = std::move(kernel_json);
  canonical["solver"] = {{"tol", cfg.solver.tol},
                         {"max_iter", cfg.solver.max_iter}};
  cfg.canonical = std::move(canonical);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read configuration file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError("malformed JSON in " + path.string(), offset);
  }
  return parse_config(j);
}

void apply_override(nlohmann::json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    bad("--set expects dotted.path=value, got \"" + std::string(assignment) +
        "\"");
  }
  const std::string_view path = assignment.substr(0, eq);
  const std::string value(assignment.substr(eq + 1));
  if (path.empty()) bad("--set path must be nonempty");

  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // bare words become strings
  }

  json* cur = &config;
  std::size_t begin = 0;
  while (true) {
    const auto dot = path.find('.', begin);
    const std::string key(
        path.substr(begin, dot == std::string_view::npos ? dot : dot - begin));
    if (key.empty()) bad("--set path has an empty segment");
    if (dot == std::string_view::npos) {
      (*cur)[key] = std::move(parsed);
      return;
    }
    json& next = (*cur)[key];
    if (!next.is_object()) next = json::object();
    cur = &next;
    begin = dot + 1;
  }
}

double sigma_from_overlap(const NodeSet& nodes, int overlap_count) {
  const int n = nodes.size();
  if (overlap_count < 1) throw ConfigError("overlap_count must be >= 1");
  if (overlap_count >= n) {
    throw ConfigError("overlap_count must be smaller than the node count");
  }
  const int dim = nodes.dim();
  const int samples = std::min(n, 256);
  const int stride = n / samples;

  std::vector<double> kth(static_cast<std::size_t>(samples));
  std::vector<double> dist2(static_cast<std::size_t>(n) - 1);
  for (int s = 0; s < samples; ++s) {
    const int i = s * stride;
    const auto xi = nodes.point(i);
    std::size_t w = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto xj = nodes.point(j);
      double d2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double d = xi[a] - xj[a];
        d2 += d * d;
      }
      dist2[w++] = d2;
    }
    std::nth_element(dist2.begin(), dist2.begin() + (overlap_count - 1),
                     dist2.end());
    kth[static_cast<std::size_t>(s)] =
        std::sqrt(dist2[static_cast<std::size_t>(overlap_count - 1)]);
  }
  std::sort(kth.begin(), kth.end());
  const double median = kth[static_cast<std::size_t>((samples - 1) / 2)];
  if (!(median > 0.0)) {
    throw ConfigError("nodes coincide; cannot size the support by overlap");
  }
  return 1.0 / median;
}

ShapeFunction make_shape(const KernelConfig& kernel, const NodeSet& nodes,
                         double fill) {
  if (kernel.sigma) return ShapeFunction(kernel.kind, *kernel.sigma);
  if (kernel.c_sigma) {
    return ShapeFunction(kernel.kind, sigma_from_fill(*kernel.c_sigma, fill));
  }
  return ShapeFunction(kernel.kind,
                       sigma_from_overlap(nodes, *kernel.overlap_count));
}

}  // namespace shepvi
