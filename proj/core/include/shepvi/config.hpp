#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "shepvi/kernels.hpp"
#include "shepvi/pgm.hpp"
#include "shepvi/solver.hpp"

namespace shepvi {

// Exactly one of the three sizing modes is set after validation: a direct
// shape parameter, a stationary scaling sigma = c_sigma / h, or a support
// sized to overlap a requested number of neighboring nodes.
struct KernelConfig {
  ShapeKind kind = ShapeKind::wendland42;
  std::optional<double> sigma;
  std::optional<double> c_sigma;
  std::optional<int> overlap_count;
};

struct MapConfig {
  std::filesystem::path path;
  GeoTransform geo;
};

struct StudyConfig {
  std::vector<int> k_list;
  std::string reference;  // "oracle", "finest", or empty for the default
};

struct RunConfig {
  std::string problem_name;
  nlohmann::json problem_overrides;  // consumed by make_problem
  std::optional<std::vector<int>> grid_counts;
  std::optional<MapConfig> map;
  KernelConfig kernel;
  SolverOptions solver;
  double eta = 1.0;
  double floor = kDefaultValueFloor;
  std::filesystem::path output_dir = "out";
  StudyConfig study;
  std::uint64_t seed = 0;

  // Normalized copy of the configuration, used to key reference caches.
  nlohmann::json canonical;
};

// Validate and normalize a configuration object.  Missing kernel settings
// fall back to the problem's published defaults; unknown keys anywhere are
// rejected.
RunConfig parse_config(const nlohmann::json& j);

// Read a JSON file and parse it.  Unreadable file -> IoError; malformed
// JSON -> ParseError with a byte offset.
RunConfig load_config(const std::filesystem::path& path);

// Apply one "dotted.path=value" assignment (the --set flag) onto a raw
// configuration object.  The value is parsed as JSON when possible and
// treated as a string otherwise.
void apply_override(nlohmann::json& config, std::string_view assignment);

// Shape parameter from a requested support overlap: the support radius 1/
// sigma is set to the (deterministic lower) median over sampled nodes of the
// distance to the overlap_count-th nearest other node.
double sigma_from_overlap(const NodeSet& nodes, int overlap_count);

// Resolve the configured kernel against a concrete node set (fill distance
// h is needed for the c_sigma mode).
ShapeFunction make_shape(const KernelConfig& kernel, const NodeSet& nodes,
                         double fill);

}  // namespace shepvi
