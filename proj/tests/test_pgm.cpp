#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <limits>
#include <string>

#include "doctest.h"
#include "shepvi/errors.hpp"
#include "shepvi/pgm.hpp"
#include "testutil.hpp"

using namespace shepvi;

namespace {
const GeoTransform kGeo{{0.0, 0.0}, {0.1, 0.1}};
}

TEST_CASE("binary and ascii twins produce identical masks") {
  const ObstacleMask p5 = parse_pgm_mask(testutil::archipelago_p5(), kGeo);
  const ObstacleMask p2 = parse_pgm_mask(testutil::archipelago_p2(), kGeo);
  REQUIRE(p5.width() == 64);
  REQUIRE(p5.height() == 64);
  REQUIRE(p2.width() == 64);
  REQUIRE(p2.height() == 64);
  CHECK(p5.admissible_count() == p2.admissible_count());
  for (int row = 0; row < 64; ++row)
    for (int col = 0; col < 64; ++col) {
      CHECK(p5.admissible_pixel(col, row) == p2.admissible_pixel(col, row));
      CHECK(p5.admissible_pixel(col, row) ==
            testutil::archipelago_admissible(col, row));
    }
}

TEST_CASE("world queries flip rows and reject the outside") {
  const ObstacleMask mask = parse_pgm_mask(testutil::archipelago_p5(), kGeo);
  CHECK(mask.world_min()[0] == 0.0);
  CHECK(mask.world_max()[0] == doctest::Approx(6.4));

  // Pixel (col, row) = (16, 20) is an island center; its world cell is
  // x in [1.6, 1.7), y in [4.3, 4.4).
  CHECK_FALSE(mask.admissible_point(1.65, 4.35));
  CHECK(mask.admissible_point(0.05, 0.05));
  CHECK_FALSE(mask.admissible_point(-0.01, 0.5));
  CHECK_FALSE(mask.admissible_point(0.5, 6.5));
  // The far top/right boundary belongs to the last pixel.
  CHECK(mask.admissible_point(6.4, 6.4) ==
        mask.admissible_pixel(63, 0));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(mask.admissible_point(nan, 1.0));
  CHECK_FALSE(mask.admissible_point(1.0, nan));
}

TEST_CASE("headers tolerate comments and arbitrary whitespace") {
  const std::string text =
      "P2 # magic\n# full line comment\n  3\t2 # dims\n255\n"
      "255 0 255\n0 255 0\n";
  const ObstacleMask mask = parse_pgm_mask(text, kGeo);
  REQUIRE(mask.width() == 3);
  REQUIRE(mask.height() == 2);
  CHECK(mask.admissible_pixel(0, 0));
  CHECK_FALSE(mask.admissible_pixel(1, 0));
  CHECK(mask.admissible_pixel(1, 1));
  CHECK(mask.admissible_count() == 3);
}

TEST_CASE("sixteen bit samples use big endian byte pairs") {
  // maxval 300 > 255 forces two bytes per sample; admissibility is
  // luminance >= 128, so 0x0100 = 256 passes and 0x007f = 127 does not.
  std::string text = "P5\n2 1\n300\n";
  text.push_back('\x01');
  text.push_back('\x00');
  text.push_back('\x00');
  text.push_back('\x7f');
  const ObstacleMask mask = parse_pgm_mask(text, kGeo);
  CHECK(mask.admissible_pixel(0, 0));
  CHECK_FALSE(mask.admissible_pixel(1, 0));
}

TEST_CASE("malformed headers name the offending byte") {
  struct Case {
    std::string text;
    std::size_t offset;
  };
  // Offsets point at the first byte of the offending token.
  const Case cases[] = {
      {"P3\n2 2\n255\n0 0 0 0\n", 0},  // wrong magic
      {"P5\n0 64\n255\n", 3},          // zero width
      {"P5\n2 2\n0\n", 7},             // maxval zero
      {"P5\n2 2\n70000\n", 7},         // maxval too large
      {"P2\n2 2\n255\n1 2 3\n", 17},   // raster runs out of samples
  };
  for (const Case& c : cases) {
    CAPTURE(c.text);
    bool threw = false;
    try {
      parse_pgm_mask(c.text, kGeo);
    } catch (const ParseError& e) {
      threw = true;
      CHECK(e.byte_offset == c.offset);
      CHECK(std::string(e.what()).find("at byte") != std::string::npos);
    }
    CHECK(threw);
  }
}

TEST_CASE("binary raster shorter than the pixel count is rejected") {
  std::string text = "P5\n4 4\n255\n";
  text.append(7, '\xff');
  CHECK_THROWS_AS(parse_pgm_mask(text, kGeo), ParseError);
}

TEST_CASE("loading from a file wraps the same parser") {
  testutil::TempDir tmp;
  const auto path = tmp.file("mask.pgm");
  testutil::write_file(path, testutil::archipelago_p5());
  const ObstacleMask mask = load_pgm_mask(path, kGeo);
  CHECK(mask.admissible_count() ==
        parse_pgm_mask(testutil::archipelago_p5(), kGeo).admissible_count());
  CHECK_THROWS_AS(load_pgm_mask(tmp.file("absent.pgm"), kGeo), IoError);
}
