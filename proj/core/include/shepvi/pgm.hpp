#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace shepvi {

// Placement of a raster in world coordinates.  Pixel (col, row) of the
// image covers the axis-aligned cell
//   x in [origin_x + col * pw,  origin_x + (col + 1) * pw)
//   y in [origin_y + (height - 1 - row) * ph,  origin_y + (height - row) * ph)
// i.e. the first raster row is the top of the picture and y grows upward.
struct GeoTransform {
  std::array<double, 2> origin{0.0, 0.0};      // world position of the lower-left corner
  std::array<double, 2> pixel_size{1.0, 1.0};  // pw, ph > 0
};

// Admissibility raster for planar problems: a pixel is admissible (free
// space) iff its luminance in the source image is at least 128.
class ObstacleMask {
 public:
  ObstacleMask(int width, int height, std::vector<std::uint8_t> admissible,
               GeoTransform geo);

  int width() const { return width_; }
  int height() const { return height_; }
  const GeoTransform& geo() const { return geo_; }

  bool admissible_pixel(int col, int row) const;

  // True iff the pixel containing (x, y) is admissible.  Points on the far
  // right/top boundary of the raster belong to the last pixel; points
  // outside the raster are inadmissible.  NaN coordinates are inadmissible.
  bool admissible_point(double x, double y) const;

  std::int64_t admissible_count() const;

  // World rectangle covered by the raster.
  std::array<double, 2> world_min() const;
  std::array<double, 2> world_max() const;

 private:
  int width_, height_;
  std::vector<std::uint8_t> admissible_;  // row major, row 0 = top raster row
  GeoTransform geo_;
};

// Parse a PGM image (magic P2 or P5, maxval <= 65535, '#' comments allowed
// in the header) into a mask.  Malformed input raises ParseError carrying
// the byte offset of the problem.
ObstacleMask parse_pgm_mask(std::string_view bytes, const GeoTransform& geo);

// Same, reading from a file.  Missing/unreadable file raises IoError.
ObstacleMask load_pgm_mask(const std::filesystem::path& path,
                           const GeoTransform& geo);

}  // namespace shepvi
