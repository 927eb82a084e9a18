#include "veinpulse/morph.hpp"

#include <algorithm>

namespace veinpulse {

std::vector<std::pair<int, int>> StructuringElement::offsets() const {
  if (radius < 1) throw Error(ErrorKind::Parameter, "structuring element radius must be >= 1");
  std::vector<std::pair<int, int>> out;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (shape == SeShape::Disk && dx * dx + dy * dy > radius * radius) continue;
      out.emplace_back(dx, dy);
    }
  }
  return out;
}

VeinMap dilate(const VeinMap& map, const StructuringElement& se) {
  const auto offsets = se.offsets();
  VeinMap out{BinaryGrid(map.width(), map.height(), 0)};
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (!map.at(x, y)) continue;
      for (const auto& [dx, dy] : offsets) {
        if (out.vein.contains(x + dx, y + dy)) out.vein.at(x + dx, y + dy) = 1;
      }
    }
  }
  return out;
}

VeinMap erode(const VeinMap& map, const StructuringElement& se) {
  const auto offsets = se.offsets();
  VeinMap out{BinaryGrid(map.width(), map.height(), 0)};
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const bool fits = std::all_of(offsets.begin(), offsets.end(), [&](auto o) {
        return map.vein.contains(x + o.first, y + o.second) && map.at(x + o.first, y + o.second);
      });
      out.vein.at(x, y) = fits ? 1 : 0;
    }
  }
  return out;
}

VeinMap open(const VeinMap& map, const StructuringElement& se) { return dilate(erode(map, se), se); }

VeinMap close(const VeinMap& map, const StructuringElement& se) { return erode(dilate(map, se), se); }

VeinMap median_filter(const VeinMap& map, int window) {
  if (window < 3 || window % 2 == 0) {
    throw Error(ErrorKind::Parameter, "median window must be odd and >= 3");
  }
  const int r = window / 2;
  const int w = map.width();
  const int h = map.height();
  const int majority = window * window / 2 + 1;
  VeinMap out{BinaryGrid(w, h, 0)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int votes = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -r; dx <= r; ++dx) votes += map.at(std::clamp(x + dx, 0, w - 1), yy) ? 1 : 0;
      }
      out.vein.at(x, y) = votes >= majority ? 1 : 0;
    }
  }
  return out;
}

VeinMap complement(const VeinMap& map) {
  VeinMap out = map;
  for (auto& v : out.vein.data()) v = v ? 0 : 1;
  return out;
}

VeinMap post_process(const VeinMap& raw, PostPreset preset, const StructuringElement& se, int median_window) {
  switch (preset) {
    case PostPreset::PaperMc:
      return median_filter(dilate(raw, se), median_window);
    case PostPreset::PaperRlt:
      return dilate(erode(median_filter(raw, median_window), se), se);
    case PostPreset::PaperRltMedianLast:
      return median_filter(dilate(erode(raw, se), se), median_window);
    case PostPreset::None:
      return raw;
  }
  return raw;
}

}  // namespace veinpulse
