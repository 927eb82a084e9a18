#include "veinpulse/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <tuple>

namespace veinpulse {

int WidthSeries::gap_count() const {
  return static_cast<int>(std::count(gap.begin(), gap.end(), true));
}

std::vector<VesselRun> column_runs(const VeinMap& map, int column) {
  if (column < 0 || column >= map.width()) {
    throw Error(ErrorKind::Parameter, "column " + std::to_string(column) + " outside image");
  }
  std::vector<VesselRun> runs;
  int y = 0;
  while (y < map.height()) {
    if (!map.at(column, y)) {
      ++y;
      continue;
    }
    const int top = y;
    while (y < map.height() && map.at(column, y)) ++y;
    const int bottom = y - 1;
    runs.push_back(VesselRun{column, 0.5 * (top + bottom), bottom - top + 1});
  }
  return runs;
}

std::pair<int, int> central_band(int width, double band_fraction) {
  if (!(band_fraction > 0.0 && band_fraction <= 1.0)) {
    throw Error(ErrorKind::Parameter, "band fraction must be in (0,1]");
  }
  const int count = std::clamp(static_cast<int>(std::lround(width * band_fraction)), 1, width);
  return {(width - count) / 2, count};
}

std::vector<VesselRun> band_runs(const VeinMap& map, double band_fraction, const std::vector<bool>* usable) {
  const auto [first, count] = central_band(map.width(), band_fraction);
  std::vector<VesselRun> out;
  for (int x = first; x < first + count; ++x) {
    if (usable && !(*usable)[static_cast<std::size_t>(x)]) continue;
    const auto runs = column_runs(map, x);
    out.insert(out.end(), runs.begin(), runs.end());
  }
  return out;
}

VesselSelection select_vessel(std::span<const VesselRun> candidates, int image_width, int image_height) {
  if (candidates.empty()) throw Error(ErrorKind::NoVessel, "no vessel runs in the central band");
  std::vector<int> widths;
  widths.reserve(candidates.size());
  for (const auto& r : candidates) widths.push_back(r.width);
  const auto mid = widths.begin() + static_cast<std::ptrdiff_t>((widths.size() - 1) / 2);
  std::nth_element(widths.begin(), mid, widths.end());
  const int median = *mid;

  const double cy = 0.5 * (image_height - 1);
  const double cx = 0.5 * (image_width - 1);
  auto key = [&](const VesselRun& r) {
    return std::make_tuple(std::abs(r.center_row - cy), r.center_row, std::abs(r.column - cx), r.column);
  };
  const VesselRun* best = nullptr;
  for (const auto& r : candidates) {
    if (r.width != median) continue;
    if (!best || key(r) < key(*best)) best = &r;
  }
  return VesselSelection{best->column, best->center_row, best->width};
}

void fill_gaps(std::vector<double>& values, const std::vector<bool>& gap) {
  const int n = static_cast<int>(values.size());
  int prev = -1;
  for (int i = 0; i <= n; ++i) {
    if (i < n && gap[static_cast<std::size_t>(i)]) continue;
    // Gaps strictly between prev and i.
    for (int j = prev + 1; j < i; ++j) {
      if (prev < 0 && i >= n) break;
      if (prev < 0) {
        values[static_cast<std::size_t>(j)] = values[static_cast<std::size_t>(i)];
      } else if (i >= n) {
        values[static_cast<std::size_t>(j)] = values[static_cast<std::size_t>(prev)];
      } else {
        const double t = static_cast<double>(j - prev) / static_cast<double>(i - prev);
        values[static_cast<std::size_t>(j)] =
            values[static_cast<std::size_t>(prev)] * (1.0 - t) + values[static_cast<std::size_t>(i)] * t;
      }
    }
    prev = i;
  }
}

namespace {

std::optional<VesselRun> nearest_run(const VeinMap& map, int column, double center, double gate) {
  std::optional<VesselRun> best;
  for (const auto& r : column_runs(map, column)) {
    const double d = std::abs(r.center_row - center);
    if (d > gate) continue;
    if (!best || d < std::abs(best->center_row - center)) best = r;
  }
  return best;
}

}  // namespace

WidthSeries width_series(std::span<const VeinMap> maps, double fps, const TrackOptions& options) {
  if (maps.empty()) throw Error(ErrorKind::Parameter, "no vein maps to track");
  if (!(fps > 0.0)) throw Error(ErrorKind::Parameter, "fps must be positive");
  if (options.width_columns < 1 || options.width_columns % 2 == 0) {
    throw Error(ErrorKind::Parameter, "width_columns must be odd and >= 1");
  }
  const int w = maps.front().width();
  const int h = maps.front().height();
  for (const auto& m : maps) {
    if (m.width() != w || m.height() != h) throw Error(ErrorKind::Dimension, "vein maps differ in size");
  }
  const int n = static_cast<int>(maps.size());

  WidthSeries series;
  series.fps = fps;
  series.frames_total = n;
  series.widths.assign(static_cast<std::size_t>(n), 0.0);
  series.gap.assign(static_cast<std::size_t>(n), true);

  if (options.per_frame) {
    bool have_reference = false;
    for (int f = 0; f < n; ++f) {
      const auto runs = band_runs(maps[static_cast<std::size_t>(f)], options.band_fraction, options.usable);
      if (runs.empty()) continue;
      const auto sel = select_vessel(runs, w, h);
      if (!have_reference) {
        series.reference = sel;
        have_reference = true;
      }
      series.widths[static_cast<std::size_t>(f)] = sel.width;
      series.gap[static_cast<std::size_t>(f)] = false;
    }
  } else {
    int start = -1;
    for (int f = 0; f < n && start < 0; ++f) {
      const auto runs = band_runs(maps[static_cast<std::size_t>(f)], options.band_fraction, options.usable);
      if (runs.empty()) continue;
      series.reference = select_vessel(runs, w, h);
      start = f;
    }
    if (start >= 0) {
      const int half = options.width_columns / 2;
      const int ref = series.reference.column;
      double center = series.reference.center_row;
      for (int f = start; f < n; ++f) {
        const auto& map = maps[static_cast<std::size_t>(f)];
        const auto at_ref = nearest_run(map, ref, center, options.gate_px);
        if (!at_ref) continue;
        double sum = 0.0;
        int count = 0;
        for (int x = std::max(0, ref - half); x <= std::min(w - 1, ref + half); ++x) {
          if (const auto r = nearest_run(map, x, at_ref->center_row, options.gate_px)) {
            sum += r->width;
            ++count;
          }
        }
        series.widths[static_cast<std::size_t>(f)] = sum / count;
        series.gap[static_cast<std::size_t>(f)] = false;
        center = at_ref->center_row;
      }
    }
  }

  const int gaps = series.gap_count();
  if (gaps == n || static_cast<double>(gaps) > options.max_gap_fraction * n) {
    throw TrackingFailure(gaps, n, options.max_gap_fraction);
  }
  fill_gaps(series.widths, series.gap);
  return series;
}

std::string width_series_csv(const WidthSeries& series) {
  std::ostringstream os;
  os.precision(10);
  os << "frame_index,time_s,width_px,gap_flag\n";
  for (int i = 0; i < series.frames_total; ++i) {
    os << i << ',' << series.time_s(i) << ',' << series.widths[static_cast<std::size_t>(i)] << ','
       << (series.gap[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace veinpulse
