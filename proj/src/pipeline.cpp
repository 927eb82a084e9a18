#include "veinpulse/pipeline.hpp"

#include "veinpulse/parallel.hpp"
#include "veinpulse/random.hpp"

namespace veinpulse {

FrameExtraction extract_frame(const Frame& frame, const PipelineConfig& config, int frame_index) {
  FrameExtraction out;
  out.mask = localize_finger(frame, config.edge_half_height);
  if (config.method == ExtractionMethod::MaxCurvature) {
    out.field = max_curvature(
        frame, out.mask,
        MaxCurvatureOptions{.sigma = config.curvature_sigma,
                            .curvature_floor = config.curvature_floor,
                            .noise_factor = config.curvature_noise_factor,
                            .directions = config.curvature_directions});
  } else {
    out.field = repeated_line_tracking(
        frame, out.mask,
        LineTrackingOptions{config.rlt_iterations, config.rlt_valley_radius, config.rlt_valley_depth,
                            derive_seed(config.seed, static_cast<std::uint64_t>(frame_index))});
  }
  try {
    out.raw = binarize(out.field, config.effective_percentile());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyMap) throw;
    out.raw = VeinMap{BinaryGrid(frame.width(), frame.height(), 0)};
    out.empty = true;
  }
  out.post = post_process(out.raw, config.effective_preset(),
                          StructuringElement{SeShape::Square, config.morph_radius}, config.median_window);
  return out;
}

SequenceExtraction extract_sequence(const VideoSequence& video, const PipelineConfig& config) {
  config.validate();
  const int n = static_cast<int>(video.size());
  SequenceExtraction out;
  out.masks.resize(static_cast<std::size_t>(n));
  out.raw.resize(static_cast<std::size_t>(n));
  out.post.resize(static_cast<std::size_t>(n));
  std::vector<char> empty(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](int i) {
    auto r = extract_frame(video[static_cast<std::size_t>(i)], config, i);
    const auto k = static_cast<std::size_t>(i);
    out.masks[k] = std::move(r.mask);
    out.raw[k] = std::move(r.raw);
    out.post[k] = std::move(r.post);
    empty[k] = r.empty ? 1 : 0;
  });
  for (char e : empty) out.empty_frames += e;
  return out;
}

TrackOptions track_options(const PipelineConfig& config) {
  TrackOptions t;
  t.band_fraction = config.central_band_fraction;
  t.gate_px = config.match_gate_px;
  t.max_gap_fraction = config.max_gap_fraction;
  t.width_columns = config.width_columns;
  return t;
}

HeartRateOptions heart_rate_options(const PipelineConfig& config) {
  HeartRateOptions h;
  h.ma_window = config.ma_window;
  h.sg_window = config.sg_window;
  h.sg_order = config.sg_order;
  h.min_prominence = config.peak_min_prominence;
  h.prominence_floor = config.peak_prominence_floor;
  h.min_separation_s = config.peak_min_separation_s;
  h.peak_series = config.peak_series;
  h.min_periodicity = config.min_periodicity;
  return h;
}

WidthSeries track_sequence(const SequenceExtraction& maps, double fps, const PipelineConfig& config) {
  TrackOptions topt = track_options(config);
  std::vector<bool> usable;
  if (!maps.masks.empty()) {
    usable = usable_columns(maps.masks.front(), config.min_inside_run);
    topt.usable = &usable;
  }
  return width_series(maps.post, fps, topt);
}

HeartRateAnalysis analyze_widths(const WidthSeries& widths, const PipelineConfig& config) {
  return analyze_heart_rate(TrendSeries{widths.widths, widths.fps, TrendStage::Raw}, heart_rate_options(config));
}

MonitorResult monitor(const VideoSequence& video, const PipelineConfig& config) {
  MonitorResult out;
  out.maps = extract_sequence(video, config);
  out.widths = track_sequence(out.maps, video.fps(), config);
  out.analysis = analyze_widths(out.widths, config);
  return out;
}

}  // namespace veinpulse
