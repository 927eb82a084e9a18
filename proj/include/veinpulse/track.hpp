#pragma once

#include <span>
#include <string>
#include <vector>

#include "veinpulse/core.hpp"
#include "veinpulse/veinmap.hpp"

namespace veinpulse {

/// A maximal vertical foreground run at one column.
struct VesselRun {
  int column = 0;
  double center_row = 0.0;
  int width = 0;

  friend bool operator==(const VesselRun&, const VesselRun&) = default;
};

struct VesselSelection {
  int column = 0;
  double center_row = 0.0;
  int width = 0;
};

struct WidthSeries {
  std::vector<double> widths;  // gaps already interpolated
  std::vector<bool> gap;
  double fps = 0.0;
  int frames_total = 0;
  VesselSelection reference;

  int gap_count() const;
  double time_s(int frame) const { return frame / fps; }
};

/// Runs at `column`, top to bottom.
std::vector<VesselRun> column_runs(const VeinMap& map, int column);

/// Columns [first, first + count) forming the middle `band_fraction` of a
/// width-`width` image.
std::pair<int, int> central_band(int width, double band_fraction);

/// All runs in the central band, skipping columns marked unusable.
std::vector<VesselRun> band_runs(const VeinMap& map, double band_fraction,
                                 const std::vector<bool>* usable = nullptr);

/// Picks the run whose width is the (lower) median of the candidate widths.
/// Ties go to the center row nearest image_height / 2, then the smaller row,
/// then the column nearest the band middle, then the smaller column.
VesselSelection select_vessel(std::span<const VesselRun> candidates, int image_width, int image_height);

struct TrackOptions {
  double band_fraction = 0.5;
  double gate_px = 15.0;
  double max_gap_fraction = 0.2;
  /// 1 = the reference column only; 5 = mean over five adjacent columns.
  int width_columns = 1;
  /// Re-select the vessel in every frame with no matching across frames.
  bool per_frame = false;
  /// Optional column filter applied to vessel selection.
  const std::vector<bool>* usable = nullptr;
};

/// Builds the width series frame by frame. The first frame with a run in the
/// central band fixes the reference column; later frames match the run whose
/// center is nearest the previous match within the gate. Unmatched frames are
/// gaps, filled by linear interpolation (ends copy the nearest value).
/// Throws TrackingFailure when the gap share exceeds max_gap_fraction.
WidthSeries width_series(std::span<const VeinMap> maps, double fps, const TrackOptions& options);

/// Fills `gap` entries in place by linear interpolation between present
/// neighbours; leading and trailing gaps copy the nearest present value.
void fill_gaps(std::vector<double>& values, const std::vector<bool>& gap);

std::string width_series_csv(const WidthSeries& series);

}  // namespace veinpulse
