#pragma once

#include <vector>

#include "veinpulse/core.hpp"

namespace veinpulse {

/// Finger region: per column, the rows [upper, lower] inclusive are tissue.
struct FingerMask {
  BinaryGrid inside;
  std::vector<int> upper_boundary;
  std::vector<int> lower_boundary;

  int width() const noexcept { return inside.width(); }
  int height() const noexcept { return inside.height(); }
  bool contains(int x, int y) const { return inside.contains(x, y) && inside.at(x, y) != 0; }
  int inside_run(int column) const {
    return lower_boundary[static_cast<std::size_t>(column)] -
           upper_boundary[static_cast<std::size_t>(column)] + 1;
  }
};

/// Mask covering every pixel.
FingerMask full_mask(int width, int height);

/// Per column, the upper boundary is the top-half row where the mean of the
/// `edge_half_height` rows starting there most exceeds the mean of the rows
/// just above it; the lower boundary mirrors this in the bottom half. Rows
/// beyond the frame replicate the edge row. Ties go to the row nearest the
/// vertical center.
FingerMask localize_finger(const Frame& frame, int edge_half_height);

/// Columns whose inside run is at least `min_run` rows.
std::vector<bool> usable_columns(const FingerMask& mask, int min_run);

}  // namespace veinpulse
