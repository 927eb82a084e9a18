#pragma once

#include <vector>

#include "veinpulse/core.hpp"
#include "veinpulse/hr.hpp"
#include "veinpulse/morph.hpp"
#include "veinpulse/roi.hpp"
#include "veinpulse/track.hpp"
#include "veinpulse/veinmap.hpp"

namespace veinpulse {

struct FrameExtraction {
  FingerMask mask;
  ScoreField field;
  VeinMap raw;
  VeinMap post;
  bool empty = false;  // score field had no nonzero pixel
};

/// ROI, scores, binarization and post-processing for one frame. An all-zero
/// score field yields empty maps with `empty` set instead of an error.
FrameExtraction extract_frame(const Frame& frame, const PipelineConfig& config, int frame_index);

struct SequenceExtraction {
  std::vector<FingerMask> masks;
  std::vector<VeinMap> raw;
  std::vector<VeinMap> post;
  int empty_frames = 0;
};

/// Per-frame extraction, parallel over frames; output order follows input.
SequenceExtraction extract_sequence(const VideoSequence& video, const PipelineConfig& config);

TrackOptions track_options(const PipelineConfig& config);
HeartRateOptions heart_rate_options(const PipelineConfig& config);

/// Width series of the post-processed maps; columns too short inside the
/// first frame's mask are not eligible as reference.
WidthSeries track_sequence(const SequenceExtraction& maps, double fps, const PipelineConfig& config);
HeartRateAnalysis analyze_widths(const WidthSeries& widths, const PipelineConfig& config);

struct MonitorResult {
  SequenceExtraction maps;
  WidthSeries widths;
  HeartRateAnalysis analysis;
};

/// Extraction, width tracking and heart-rate analysis.
MonitorResult monitor(const VideoSequence& video, const PipelineConfig& config);

}  // namespace veinpulse
