#include "shepvi/pgm.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "shepvi/errors.hpp"

namespace shepvi {

ObstacleMask::ObstacleMask(int width, int height,
                           std::vector<std::uint8_t> admissible,
                           GeoTransform geo)
    : width_(width), height_(height), admissible_(std::move(admissible)),
      geo_(geo) {
  if (width_ <= 0 || height_ <= 0)
    throw std::invalid_argument("mask dimensions must be positive");
  if (admissible_.size() != static_cast<std::size_t>(width_) * height_)
    throw std::invalid_argument("mask buffer size does not match dimensions");
  if (!(geo_.pixel_size[0] > 0.0) || !(geo_.pixel_size[1] > 0.0))
    throw std::invalid_argument("pixel size must be positive");
}

bool ObstacleMask::admissible_pixel(int col, int row) const {
  if (col < 0 || col >= width_ || row < 0 || row >= height_) return false;
  return admissible_[static_cast<std::size_t>(row) * width_ + col] != 0;
}

bool ObstacleMask::admissible_point(double x, double y) const {
  if (!std::isfinite(x) || !std::isfinite(y)) return false;
  const double cx = (x - geo_.origin[0]) / geo_.pixel_size[0];
  const double cy = (y - geo_.origin[1]) / geo_.pixel_size[1];
  if (cx < 0.0 || cy < 0.0) return false;
  int col = static_cast<int>(cx);
  int up = static_cast<int>(cy);  // rows counted from the bottom here
  // The far right/top edges belong to the outermost pixels.
  if (col == width_ && cx == static_cast<double>(width_)) col = width_ - 1;
  if (up == height_ && cy == static_cast<double>(height_)) up = height_ - 1;
  if (col >= width_ || up >= height_) return false;
  return admissible_pixel(col, height_ - 1 - up);
}

std::int64_t ObstacleMask::admissible_count() const {
  std::int64_t n = 0;
  for (std::uint8_t v : admissible_) n += (v != 0);
  return n;
}

std::array<double, 2> ObstacleMask::world_min() const { return geo_.origin; }

std::array<double, 2> ObstacleMask::world_max() const {
  return {geo_.origin[0] + geo_.pixel_size[0] * width_,
          geo_.origin[1] + geo_.pixel_size[1] * height_};
}

namespace {

// Header tokenizer: whitespace separated fields, '#' starts a comment that
// runs to the end of the line.
struct Cursor {
  std::string_view bytes;
  std::size_t pos = 0;

  bool eof() const { return pos >= bytes.size(); }

  void skip_space_and_comments() {
    while (!eof()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (!eof() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' ||
                 c == '\v' || c == '\f') {
        ++pos;
      } else {
        break;
      }
    }
  }

  // Parses an unsigned decimal integer; reports the byte offset of the
  // offending character on failure.
  long next_uint(const char* what) {
    skip_space_and_comments();
    if (eof())
      throw ParseError(std::string("missing ") + what, pos);
    if (bytes[pos] < '0' || bytes[pos] > '9')
      throw ParseError(std::string("expected digit for ") + what, pos);
    long v = 0;
    while (!eof() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1000000000L)
        throw ParseError(std::string(what) + " out of range", pos);
      ++pos;
    }
    return v;
  }
};

}  // namespace

ObstacleMask parse_pgm_mask(std::string_view bytes, const GeoTransform& geo) {
  if (bytes.size() < 2 || bytes[0] != 'P' ||
      (bytes[1] != '2' && bytes[1] != '5')) {
    throw ParseError("not a P2/P5 portable graymap", 0);
  }
  const bool binary = bytes[1] == '5';
  Cursor cur{bytes, 2};

  const std::size_t width_at = (cur.skip_space_and_comments(), cur.pos);
  const long width = cur.next_uint("width");
  const long height = cur.next_uint("height");
  const std::size_t maxval_at = (cur.skip_space_and_comments(), cur.pos);
  const long maxval = cur.next_uint("maxval");

  if (width <= 0 || height <= 0)
    throw ParseError("image dimensions must be positive", width_at);
  if (static_cast<std::int64_t>(width) * height > (std::int64_t{1} << 28))
    throw ParseError("image dimensions out of range", width_at);
  if (maxval <= 0 || maxval > 65535)
    throw ParseError("maxval must be in [1, 65535]", maxval_at);

  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> adm(count);

  if (binary) {
    // Exactly one whitespace byte separates the header from the raster.
    if (cur.eof())
      throw ParseError("missing raster data", cur.pos);
    const char sep = bytes[cur.pos];
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n')
      throw ParseError("expected whitespace before raster data", cur.pos);
    ++cur.pos;
    const int stride = maxval > 255 ? 2 : 1;
    if (bytes.size() - cur.pos < count * stride)
      throw ParseError("truncated raster data", bytes.size());
    for (std::size_t i = 0; i < count; ++i) {
      long v;
      if (stride == 1) {
        v = static_cast<unsigned char>(bytes[cur.pos + i]);
      } else {
        v = static_cast<unsigned char>(bytes[cur.pos + 2 * i]) * 256L +
            static_cast<unsigned char>(bytes[cur.pos + 2 * i + 1]);
      }
      if (v > maxval)
        throw ParseError("sample exceeds maxval", cur.pos + i * stride);
      adm[i] = v >= 128 ? 1 : 0;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      cur.skip_space_and_comments();
      const std::size_t at = cur.pos;
      const long v = cur.next_uint("sample");
      if (v > maxval) throw ParseError("sample exceeds maxval", at);
      adm[i] = v >= 128 ? 1 : 0;
    }
  }

  return ObstacleMask(static_cast<int>(width), static_cast<int>(height),
                      std::move(adm), geo);
}

ObstacleMask load_pgm_mask(const std::filesystem::path& path,
                           const GeoTransform& geo) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return parse_pgm_mask(buf.str(), geo);
}

}  // namespace shepvi
