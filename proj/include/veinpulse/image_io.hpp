#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "veinpulse/core.hpp"

namespace veinpulse {

struct Gray8Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Binary PGM (P5, maxval 255).
Gray8Image read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Gray8Image& image);

/// 8-bit grayscale PNG. Color or 16-bit images raise a format error.
Gray8Image read_png(const std::filesystem::path& path);

/// Dispatches on extension (.pgm / .png, case-insensitive).
Gray8Image read_gray_image(const std::filesystem::path& path);

void write_frame_pgm(const std::filesystem::path& path, const Frame& frame);

/// Min-max scaled to 0..255; an all-constant grid maps to 0.
void write_scaled_pgm(const std::filesystem::path& path, const Grid<double>& grid);

/// Foreground 255, background 0.
void write_binary_pgm(const std::filesystem::path& path, const BinaryGrid& grid);

}  // namespace veinpulse
