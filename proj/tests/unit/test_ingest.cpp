#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <png.h>

#include <fstream>

#include "../support.hpp"
#include "veinpulse/image_io.hpp"
#include "veinpulse/ingest.hpp"

using namespace veinpulse;
namespace fs = std::filesystem;

namespace {

void write_gray(const fs::path& path, int w, int h, std::uint8_t base) {
  Gray8Image img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w * h))};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(base + i % 7);
  write_pgm(path, img);
}

void write_png(const fs::path& path, int w, int h, png_uint_32 format, std::uint8_t value) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image), value);
  REQUIRE(png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr) != 0);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("three zero-padded frames load in order at the given fps") {
  vp_test::TempDir dir("ingest");
  for (int i = 2; i >= 0; --i) write_gray(dir.path() / ("f00" + std::to_string(i) + ".pgm"), 6, 4, static_cast<std::uint8_t>(10 * i));
  const auto video = load_sequence({dir.path(), "*.pgm", 30.0});
  REQUIRE(video.size() == 3);
  CHECK(video.fps() == 30.0);
  CHECK(video.width() == 6);
  CHECK(video.height() == 4);
  for (int i = 0; i < 3; ++i) CHECK(video[static_cast<std::size_t>(i)].at(0, 0) == doctest::Approx(10.0 * i / 255.0));
}

TEST_CASE("empty or missing directory is not-found") {
  vp_test::TempDir dir("ingest_empty");
  CHECK(kind_of([&] { load_sequence({dir.path(), "*.pgm", 30.0}); }) == ErrorKind::NotFound);
  CHECK(kind_of([&] { load_sequence({dir.path() / "missing", "*.pgm", 30.0}); }) == ErrorKind::NotFound);
}

TEST_CASE("frames of different sizes are a dimension error") {
  vp_test::TempDir dir("ingest_dims");
  write_gray(dir.path() / "f000.pgm", 320, 240, 0);
  write_gray(dir.path() / "f001.pgm", 321, 240, 0);
  CHECK(kind_of([&] { load_sequence({dir.path(), "*.pgm", 30.0}); }) == ErrorKind::Dimension);
}

TEST_CASE("fps must be positive") {
  vp_test::TempDir dir("ingest_fps");
  write_gray(dir.path() / "f000.pgm", 4, 4, 0);
  CHECK(kind_of([&] { load_sequence({dir.path(), "*.pgm", 0.0}); }) == ErrorKind::Parameter);
}

TEST_CASE("glob pattern selects and sorts by name") {
  vp_test::TempDir dir("ingest_glob");
  write_gray(dir.path() / "b_01.pgm", 4, 4, 0);
  write_gray(dir.path() / "a_10.pgm", 4, 4, 0);
  write_gray(dir.path() / "a_02.pgm", 4, 4, 0);
  std::ofstream(dir.path() / "notes.txt") << "x";
  const auto files = list_frames({dir.path(), "a_*.pgm", 30.0});
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "a_02.pgm");
  CHECK(files[1].filename() == "a_10.pgm");
}

TEST_CASE("PGM header comments are skipped and bad headers rejected") {
  vp_test::TempDir dir("ingest_pgm");
  {
    std::ofstream out(dir.path() / "c.pgm", std::ios::binary);
    out << "P5\n# made by hand\n2 1\n# another\n255\n";
    out.put(static_cast<char>(0));
    out.put(static_cast<char>(255));
  }
  const auto img = read_pgm(dir.path() / "c.pgm");
  CHECK(img.width == 2);
  CHECK(img.pixels == std::vector<std::uint8_t>{0, 255});

  std::ofstream(dir.path() / "p2.pgm") << "P2\n1 1\n255\n0\n";
  CHECK(kind_of([&] { read_pgm(dir.path() / "p2.pgm"); }) == ErrorKind::Format);
  std::ofstream(dir.path() / "deep.pgm") << "P5\n1 1\n65535\n";
  CHECK(kind_of([&] { read_pgm(dir.path() / "deep.pgm"); }) == ErrorKind::Format);
  {
    std::ofstream out(dir.path() / "short.pgm", std::ios::binary);
    out << "P5\n4 4\n255\n";
    out.put(1);
  }
  CHECK(kind_of([&] { read_pgm(dir.path() / "short.pgm"); }) == ErrorKind::Format);
}

TEST_CASE("PNG grayscale frames load; color PNG is a format error") {
  vp_test::TempDir dir("ingest_png");
  write_png(dir.path() / "f000.png", 5, 3, PNG_FORMAT_GRAY, 51);
  write_png(dir.path() / "f001.png", 5, 3, PNG_FORMAT_GRAY, 102);
  const auto video = load_sequence({dir.path(), "*.png", 25.0});
  REQUIRE(video.size() == 2);
  CHECK(video[1].at(4, 2) == doctest::Approx(0.4));

  write_png(dir.path() / "rgb.png", 2, 2, PNG_FORMAT_RGB, 10);
  CHECK(kind_of([&] { read_png(dir.path() / "rgb.png"); }) == ErrorKind::Format);
  CHECK(kind_of([&] { read_gray_image(dir.path() / "x.bmp"); }) == ErrorKind::Format);
}

TEST_CASE("written frames read back within quantization") {
  vp_test::TempDir dir("ingest_rt");
  const Frame f(3, 2, std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0, 0.1});
  write_frame_pgm(dir.path() / "f.pgm", f);
  const auto video = load_sequence({dir.path(), "*.pgm", 1.0});
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(video[0].pixels()[i] - f.pixels()[i]) <= 0.5 / 255.0 + 1e-12);
}
