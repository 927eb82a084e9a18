#include "veinpulse/roi.hpp"

#include <algorithm>

namespace veinpulse {

FingerMask full_mask(int width, int height) {
  FingerMask mask;
  mask.inside = BinaryGrid(width, height, 1);
  mask.upper_boundary.assign(static_cast<std::size_t>(width), 0);
  mask.lower_boundary.assign(static_cast<std::size_t>(width), height - 1);
  return mask;
}

FingerMask localize_finger(const Frame& frame, int edge_half_height) {
  const int w = frame.width();
  const int h = frame.height();
  const int k = edge_half_height;
  if (k < 1) throw Error(ErrorKind::Parameter, "edge_half_height must be >= 1");
  if (h <= 2 * k) {
    throw Error(ErrorKind::Dimension, "frame height " + std::to_string(h) +
                                          " too short for edge detector of half-height " +
                                          std::to_string(k));
  }

  FingerMask mask;
  mask.inside = BinaryGrid(w, h, 0);
  mask.upper_boundary.resize(static_cast<std::size_t>(w));
  mask.lower_boundary.resize(static_cast<std::size_t>(w));

  // Column prefix sums over an edge-replicated copy padded by k rows.
  std::vector<double> prefix(static_cast<std::size_t>(h + 2 * k + 1));
  const int mid = h / 2;
  for (int x = 0; x < w; ++x) {
    prefix[0] = 0.0;
    for (int i = 0; i < h + 2 * k; ++i) {
      const int y = std::clamp(i - k, 0, h - 1);
      prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + frame.at(x, y);
    }
    // Sum of rows [a, b) in frame coordinates.
    auto block = [&](int a, int b) {
      return prefix[static_cast<std::size_t>(b + k)] - prefix[static_cast<std::size_t>(a + k)];
    };

    // Scan toward the center so that ">=" lands ties nearest the center.
    int upper = mid - 1;
    double best = -1e300;
    for (int r = 0; r < mid; ++r) {
      const double response = block(r, r + k) - block(r - k, r);
      if (response >= best) {
        best = response;
        upper = r;
      }
    }
    int lower = mid;
    best = -1e300;
    for (int r = h - 1; r >= mid; --r) {
      const double response = block(r - k + 1, r + 1) - block(r + 1, r + k + 1);
      if (response >= best) {
        best = response;
        lower = r;
      }
    }
    mask.upper_boundary[static_cast<std::size_t>(x)] = upper;
    mask.lower_boundary[static_cast<std::size_t>(x)] = lower;
    for (int y = upper; y <= lower; ++y) mask.inside.at(x, y) = 1;
  }
  return mask;
}

std::vector<bool> usable_columns(const FingerMask& mask, int min_run) {
  std::vector<bool> out(static_cast<std::size_t>(mask.width()));
  for (int x = 0; x < mask.width(); ++x) out[static_cast<std::size_t>(x)] = mask.inside_run(x) >= min_run;
  return out;
}

}  // namespace veinpulse
