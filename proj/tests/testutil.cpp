#include "testutil.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace shepvi::testutil {

const std::array<Island, 5>& archipelago_islands() {
  static const std::array<Island, 5> islands = {{
      {16, 20, 7},
      {40, 14, 9},
      {30, 42, 11},
      {52, 50, 8},
      {8, 52, 6},
  }};
  return islands;
}

bool archipelago_admissible(int col, int row) {
  if (col < 0 || col >= kArchipelagoSize || row < 0 || row >= kArchipelagoSize)
    return false;
  for (const Island& is : archipelago_islands()) {
    const int dc = col - is.col;
    const int dr = row - is.row;
    if (dc * dc + dr * dr <= is.radius * is.radius) return false;
  }
  return true;
}

std::string archipelago_p5() {
  std::string out = "P5\n64 64\n255\n";
  out.reserve(out.size() + kArchipelagoSize * kArchipelagoSize);
  for (int row = 0; row < kArchipelagoSize; ++row)
    for (int col = 0; col < kArchipelagoSize; ++col)
      out.push_back(archipelago_admissible(col, row) ? '\xff' : '\0');
  return out;
}

std::string archipelago_p2() {
  std::ostringstream out;
  out << "P2\n64 64\n255\n";
  for (int row = 0; row < kArchipelagoSize; ++row) {
    for (int col = 0; col < kArchipelagoSize; ++col) {
      if (col) out << ' ';
      out << (archipelago_admissible(col, row) ? 255 : 0);
    }
    out << '\n';
  }
  return out.str();
}

TempDir::TempDir() {
  static std::mt19937_64 rng{std::random_device{}()};
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto candidate = base / ("shepvi_test_" + std::to_string(rng()));
    std::error_code ec;
    if (std::filesystem::create_directory(candidate, ec)) {
      path_ = std::move(candidate);
      return;
    }
  }
  throw std::runtime_error("could not create a temporary test directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("failed to open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> random_points(std::mt19937_64& rng, int n, int dim,
                                  double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> pts(static_cast<std::size_t>(n) * dim);
  for (double& v : pts) v = dist(rng);
  return pts;
}

}  // namespace shepvi::testutil
