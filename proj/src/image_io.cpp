#include "veinpulse/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

namespace veinpulse {

namespace {

// Reads one header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c) && c != '#') {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (token.empty()) throw Error(ErrorKind::Format, "truncated PGM header: " + path.string());
  // c is the single whitespace separating the header from the raster.
  return token;
}

int header_int(std::istream& in, const std::filesystem::path& path) {
  const auto token = next_token(in, path);
  if (!std::all_of(token.begin(), token.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
    throw Error(ErrorKind::Format, "bad PGM header field '" + token + "' in " + path.string());
  }
  return std::stoi(token);
}

std::string lower_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

Gray8Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open " + path.string());
  if (next_token(in, path) != "P5") {
    throw Error(ErrorKind::Format, "not a binary PGM (P5): " + path.string());
  }
  Gray8Image img;
  img.width = header_int(in, path);
  img.height = header_int(in, path);
  const int maxval = header_int(in, path);
  if (maxval != 255) {
    throw Error(ErrorKind::Format, "only maxval 255 PGM is supported: " + path.string());
  }
  if (img.width <= 0 || img.height <= 0) {
    throw Error(ErrorKind::Dimension, "empty PGM image: " + path.string());
  }
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw Error(ErrorKind::Format, "truncated PGM raster: " + path.string());
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const Gray8Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

Gray8Image read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorKind::NotFound, "cannot open " + path.string());

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_stdio(&image, fp.get())) {
    throw Error(ErrorKind::Format, "invalid PNG " + path.string() + ": " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  const bool eight_bit = (image.format & PNG_FORMAT_FLAG_LINEAR) == 0;
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  if (!gray || !eight_bit || alpha) {
    png_image_free(&image);
    throw Error(ErrorKind::Format, "PNG is not 8-bit grayscale: " + path.string());
  }
  image.format = PNG_FORMAT_GRAY;
  Gray8Image out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::Format, "PNG decode failed " + path.string() + ": " + image.message);
  }
  return out;
}

Gray8Image read_gray_image(const std::filesystem::path& path) {
  const auto ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw Error(ErrorKind::Format, "unsupported image type: " + path.string());
}

void write_frame_pgm(const std::filesystem::path& path, const Frame& frame) {
  write_pgm(path, Gray8Image{frame.width(), frame.height(), denormalize_frame(frame)});
}

void write_scaled_pgm(const std::filesystem::path& path, const Grid<double>& grid) {
  Gray8Image img{grid.width(), grid.height(), std::vector<std::uint8_t>(grid.size(), 0)};
  if (!grid.empty()) {
    const auto [lo, hi] = std::minmax_element(grid.data().begin(), grid.data().end());
    const double span = *hi - *lo;
    if (span > 0.0) {
      std::transform(grid.data().begin(), grid.data().end(), img.pixels.begin(), [&](double v) {
        return static_cast<std::uint8_t>(std::lround((v - *lo) / span * 255.0));
      });
    }
  }
  write_pgm(path, img);
}

void write_binary_pgm(const std::filesystem::path& path, const BinaryGrid& grid) {
  Gray8Image img{grid.width(), grid.height(), std::vector<std::uint8_t>(grid.size())};
  std::transform(grid.data().begin(), grid.data().end(), img.pixels.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
  write_pgm(path, img);
}

}  // namespace veinpulse
