#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "../support.hpp"
#include "veinpulse/pipeline.hpp"
#include "veinpulse/track.hpp"

using namespace veinpulse;

namespace {

struct Tracked {
  Phantom phantom;
  WidthSeries series;
};

Tracked track_phantom(PhantomSpec spec) {
  Tracked t{render_phantom(spec), {}};
  const PipelineConfig config;
  t.series = track_sequence(extract_sequence(t.phantom.video, config), spec.fps, config);
  return t;
}

double smoothed_correlation(const Tracked& t) {
  const auto smooth = moving_average(TrendSeries{t.series.widths, t.series.fps, TrendStage::Raw}, 5);
  std::vector<double> truth(t.series.widths.size());
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = t.phantom.truth.width(static_cast<int>(i), 0);
  return vp_test::pearson(smooth.values, truth);
}

VeinMap shifted(const VeinMap& m, int dx) {
  VeinMap out{BinaryGrid(m.width(), m.height(), 0)};
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.vein.contains(x - dx, y)) out.vein.at(x, y) = m.vein.at(x - dx, y);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("column runs examples") {
  VeinMap m{BinaryGrid(3, 40, 0)};
  CHECK(column_runs(m, 1).empty());
  for (int y = 10; y <= 14; ++y) m.vein.at(1, y) = 1;
  for (int y = 30; y <= 36; ++y) m.vein.at(1, y) = 1;
  const auto runs = column_runs(m, 1);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0] == VesselRun{1, 12.0, 5});
  CHECK(runs[1] == VesselRun{1, 33.0, 7});

  m.vein.at(2, 39) = 1;
  const auto edge = column_runs(m, 2);
  REQUIRE(edge.size() == 1);
  CHECK(edge[0].width == 1);
  CHECK(edge[0].center_row == 39.0);
}

TEST_CASE("central band covers the middle fraction") {
  CHECK(central_band(160, 0.5) == std::pair<int, int>{40, 80});
  CHECK(central_band(160, 1.0) == std::pair<int, int>{0, 160});
  const auto [first, count] = central_band(7, 0.01);
  CHECK(count >= 1);
  CHECK(first == 3);
}

TEST_CASE("selection takes the median width run") {
  const std::vector<VesselRun> one{{50, 30.0, 4}};
  CHECK(select_vessel(one, 100, 60).center_row == 30.0);

  const std::vector<VesselRun> three{{50, 10.0, 3}, {50, 30.0, 9}, {50, 45.0, 5}};
  const auto pick = select_vessel(three, 100, 60);
  CHECK(pick.width == 5);
  CHECK(pick.center_row == 45.0);

  const std::vector<VesselRun> tie{{50, 10.0, 5}, {50, 34.0, 5}, {50, 26.0, 5}};
  CHECK(select_vessel(tie, 100, 60).center_row == 26.0);
  const std::vector<VesselRun> nearer{{50, 10.0, 5}, {50, 32.0, 5}, {50, 26.0, 5}};
  CHECK(select_vessel(nearer, 100, 60).center_row == 32.0);
  const std::vector<VesselRun> even{{50, 10.0, 4}, {50, 20.0, 6}};
  CHECK(select_vessel(even, 100, 60).width == 4);

  CHECK_THROWS_AS(select_vessel(std::vector<VesselRun>{}, 100, 60), Error);
}

TEST_CASE("two equal vessels: the one nearer the vertical center is monitored") {
  auto spec = vp_test::short_phantom("two-vessel", 0.1);
  for (auto& v : spec.vessels) v.modulation_amplitude = 0.0;
  const auto ph = render_phantom(spec);
  const PipelineConfig config;
  const auto ex = extract_frame(ph.video[0], config, 0);
  const auto pick = select_vessel(band_runs(ex.post, 0.5), spec.width, spec.height);
  CHECK(std::abs(pick.center_row - 45.0) <= 2.0);
}

TEST_CASE("phantom run widths match the rendered width") {
  auto spec = vp_test::short_phantom("default", 0.3);
  spec.vessels.front().orientation_deg = 0.0;
  const auto flat = render_phantom(spec);
  const PipelineConfig config;
  int checked = 0;
  for (int i = 0; i < flat.truth.frame_count(); i += 3) {
    const auto ex = extract_frame(flat.video[static_cast<std::size_t>(i)], config, i);
    for (const auto& run : column_runs(ex.post, spec.width / 2)) {
      if (std::abs(run.center_row - 60.0) > 5) continue;
      CHECK(std::abs(run.width - flat.truth.drawn_width(i, 0)) <= 1.0);
      ++checked;
    }
  }
  CHECK(checked >= 3);
}

TEST_CASE("static scene gives a constant width series") {
  for (const char* method : {"maxcurv", "rlt"}) {
    auto spec = vp_test::short_phantom("zero-modulation", 2.0);
    spec.noise_sigma = 0.0;
    PipelineConfig config;
    config.set("method", method);
    const auto ph = render_phantom(spec);
    const auto series = track_sequence(extract_sequence(ph.video, config), spec.fps, config);
    CHECK(series.gap_count() == 0);
    const auto [lo, hi] = std::minmax_element(series.widths.begin(), series.widths.end());
    CHECK(*hi - *lo <= 1.0);
    CHECK(std::abs(*lo - ph.truth.drawn_width(0, 0)) <= 1.0);
  }
}

TEST_CASE("static vessel under sensor noise stays within a pixel of its median") {
  for (const char* method : {"maxcurv", "rlt"}) {
    const auto spec = vp_test::short_phantom("zero-modulation", 4.0);
    PipelineConfig config;
    config.set("method", method);
    const auto series = track_sequence(extract_sequence(render_phantom(spec).video, config), spec.fps, config);
    auto sorted = series.widths;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const auto near = std::count_if(series.widths.begin(), series.widths.end(),
                                    [&](double w) { return std::abs(w - median) <= 1.0; });
    CHECK(static_cast<double>(near) / static_cast<double>(series.widths.size()) >= 0.9);
  }
}

TEST_CASE("width series follows the pulsating vessel") {
  const auto t = track_phantom(vp_test::short_phantom("default", 6.0));
  CHECK(t.series.frames_total == 180);
  CHECK(smoothed_correlation(t) >= 0.9);
}

TEST_CASE("width series survives 10 px/frame horizontal jitter") {
  auto spec = vp_test::short_phantom("default", 6.0);
  spec.jitter_px_per_frame = 10.0;
  const auto t = track_phantom(spec);
  CHECK(smoothed_correlation(t) >= 0.9);
}

TEST_CASE("gap filling interpolates and copies at the ends") {
  std::vector<double> v{0, 4, 0, 0, 10, 0};
  const std::vector<bool> gap{true, false, true, true, false, true};
  fill_gaps(v, gap);
  CHECK(v == std::vector<double>{4, 4, 6, 8, 10, 10});

  std::vector<double> none{1, 2, 3};
  fill_gaps(none, {false, false, false});
  CHECK(none == std::vector<double>{1, 2, 3});
}

TEST_CASE("too many missing frames is a tracking failure") {
  VeinMap vessel{BinaryGrid(40, 40, 0)};
  for (int y = 18; y < 23; ++y) {
    for (int x = 0; x < 40; ++x) vessel.vein.at(x, y) = 1;
  }
  const VeinMap blank{BinaryGrid(40, 40, 0)};
  std::vector<VeinMap> maps(7, vessel);
  maps.insert(maps.end(), 3, blank);

  TrackOptions options;
  try {
    width_series(maps, 30.0, options);
    FAIL("expected TrackingFailure");
  } catch (const TrackingFailure& e) {
    CHECK(e.kind() == ErrorKind::TrackingFailure);
    CHECK(e.gap_frames() == 3);
    CHECK(e.total_frames() == 10);
    CHECK(e.gap_fraction() == doctest::Approx(0.3));
  }

  maps[8] = vessel;
  const auto ok = width_series(maps, 30.0, options);
  CHECK(ok.gap_count() == 2);
  CHECK(ok.widths.size() == 10);
  for (double w : ok.widths) CHECK(w == 5.0);
}

TEST_CASE("per-frame mode commutes with frame permutation") {
  const auto ph = render_phantom(vp_test::short_phantom("default", 0.5));
  const PipelineConfig config;
  const auto ex = extract_sequence(ph.video, config);
  TrackOptions options;
  options.per_frame = true;
  const auto forward = width_series(ex.post, 30.0, options);

  std::vector<int> order(ex.post.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937 rng(4);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<VeinMap> permuted;
  for (int i : order) permuted.push_back(ex.post[static_cast<std::size_t>(i)]);
  const auto back = width_series(permuted, 30.0, options);
  for (std::size_t k = 0; k < order.size(); ++k) {
    CHECK(back.widths[k] == forward.widths[static_cast<std::size_t>(order[k])]);
  }
}

TEST_CASE("horizontal translation leaves widths unchanged") {
  auto spec = vp_test::short_phantom("default", 0.5);
  spec.vessels.front().orientation_deg = 0.0;
  const auto ph = render_phantom(spec);
  const PipelineConfig config;
  const auto ex = extract_sequence(ph.video, config);
  const auto base = width_series(ex.post, 30.0, TrackOptions{});
  for (int dx : {-7, 4, 12}) {
    std::vector<VeinMap> moved;
    for (const auto& m : ex.post) moved.push_back(shifted(m, dx));
    const auto after = width_series(moved, 30.0, TrackOptions{});
    for (std::size_t i = 0; i < base.widths.size(); ++i) CHECK(std::abs(after.widths[i] - base.widths[i]) <= 1.0);
  }
}

TEST_CASE("five-column width is the mean over adjacent columns") {
  VeinMap m{BinaryGrid(21, 30, 0)};
  const int heights[] = {3, 5, 7, 5, 5};
  for (int x = 0; x < 21; ++x) {
    const int h = (x >= 8 && x <= 12) ? heights[x - 8] : 5;
    for (int y = 15 - h / 2; y <= 15 + h / 2; ++y) m.vein.at(x, y) = 1;
  }
  TrackOptions options;
  options.band_fraction = 0.05;
  options.width_columns = 5;
  const std::vector<VeinMap> maps{m};
  const auto series = width_series(maps, 30.0, options);
  CHECK(series.reference.column == 10);
  CHECK(series.widths[0] == doctest::Approx(5.0));
  options.width_columns = 1;
  CHECK(width_series(maps, 30.0, options).widths[0] == 7.0);
}

TEST_CASE("width series CSV layout") {
  WidthSeries s;
  s.widths = {5.0, 6.5};
  s.gap = {false, true};
  s.fps = 2.0;
  s.frames_total = 2;
  CHECK(width_series_csv(s) == "frame_index,time_s,width_px,gap_flag\n0,0,5,0\n1,0.5,6.5,1\n");
}
