#pragma once

#include <utility>
#include <vector>

#include "veinpulse/core.hpp"
#include "veinpulse/veinmap.hpp"

namespace veinpulse {

enum class SeShape { Square, Disk };

struct StructuringElement {
  SeShape shape = SeShape::Square;
  int radius = 1;

  /// Member offsets (dx, dy); validates radius >= 1.
  std::vector<std::pair<int, int>> offsets() const;
};

// Pixels outside the grid count as background for both dilate and erode, so
// erosion strips a border of `radius` from a full map.
VeinMap dilate(const VeinMap& map, const StructuringElement& se);
VeinMap erode(const VeinMap& map, const StructuringElement& se);
VeinMap open(const VeinMap& map, const StructuringElement& se);
VeinMap close(const VeinMap& map, const StructuringElement& se);

/// Binary majority over a window x window neighbourhood with edge
/// replication. Window must be odd and >= 3.
VeinMap median_filter(const VeinMap& map, int window);

VeinMap complement(const VeinMap& map);

/// The fixed post-processing chains applied to raw extraction output.
VeinMap post_process(const VeinMap& raw, PostPreset preset, const StructuringElement& se, int median_window);

}  // namespace veinpulse
