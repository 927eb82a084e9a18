#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "veinpulse/errors.hpp"

namespace veinpulse {

/// Row-major 2-D buffer. Bounds are the caller's responsibility for the
/// unchecked accessors; `contains` is the cheap guard.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    if (width < 0 || height < 0) {
      throw Error(ErrorKind::Dimension, "grid dimensions must be non-negative");
    }
  }
  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0 ||
        data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw Error(ErrorKind::Dimension, "grid data length does not match width x height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using BinaryGrid = Grid<std::uint8_t>;

/// One grayscale image with intensities in [0,1].
class Frame {
 public:
  Frame() = default;
  /// Validates dimensions and intensity range.
  Frame(int width, int height, std::vector<double> pixels);
  explicit Frame(Grid<double> pixels);

  int width() const noexcept { return pixels_.width(); }
  int height() const noexcept { return pixels_.height(); }
  double at(int x, int y) const { return pixels_.at(x, y); }
  const Grid<double>& grid() const noexcept { return pixels_; }
  std::span<const double> pixels() const noexcept { return pixels_.data(); }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  Grid<double> pixels_;
};

class VideoSequence {
 public:
  VideoSequence() = default;
  VideoSequence(std::vector<Frame> frames, double fps);

  const std::vector<Frame>& frames() const noexcept { return frames_; }
  std::size_t size() const noexcept { return frames_.size(); }
  const Frame& operator[](std::size_t i) const { return frames_[i]; }
  double fps() const noexcept { return fps_; }
  int width() const noexcept { return frames_.empty() ? 0 : frames_.front().width(); }
  int height() const noexcept { return frames_.empty() ? 0 : frames_.front().height(); }
  double duration_s() const noexcept { return static_cast<double>(frames_.size()) / fps_; }

 private:
  std::vector<Frame> frames_;
  double fps_ = 0.0;
};

enum class ExtractionMethod { MaxCurvature, RepeatedLineTracking };

const char* to_string(ExtractionMethod method);
ExtractionMethod parse_method(const std::string& text);

/// Post-processing order applied to raw vein maps.
enum class PostPreset {
  PaperMc,   // dilate -> median
  PaperRlt,  // median -> erode -> dilate
  PaperRltMedianLast,  // erode -> dilate -> median
  None,
};

const char* to_string(PostPreset preset);
PostPreset parse_preset(const std::string& text);
PostPreset default_preset(ExtractionMethod method);
/// 50 for curvature scores; 10 for line-tracking visit counts.
double default_percentile(ExtractionMethod method);

enum class CurvatureDirections { Four, VerticalOnly };
enum class PeakSeries { Derivative, SavitzkyGolay };

/// Every tunable of the pipeline. Defaults are the reproducible baseline.
struct PipelineConfig {
  ExtractionMethod method = ExtractionMethod::MaxCurvature;
  std::optional<PostPreset> preset;  // unset: follow method

  int edge_half_height = 4;
  int min_inside_run = 10;

  double curvature_sigma = 1.0;
  double curvature_floor = 0.01;
  double curvature_noise_factor = 2.0;
  CurvatureDirections curvature_directions = CurvatureDirections::Four;

  int rlt_iterations = 3000;
  double rlt_valley_radius = 10.0;
  double rlt_valley_depth = 0.05;
  std::uint64_t seed = 0;

  std::optional<double> binarize_percentile;  // unset: follow method
  int morph_radius = 1;
  int median_window = 5;

  double central_band_fraction = 0.5;
  double match_gate_px = 15.0;
  double max_gap_fraction = 0.2;
  int width_columns = 1;

  int ma_window = 5;
  int sg_window = 11;
  int sg_order = 3;
  std::optional<double> peak_min_prominence;  // unset: 0.25 x IQR with floor
  double peak_prominence_floor = 4.0;
  double peak_min_separation_s = 0.33;
  PeakSeries peak_series = PeakSeries::Derivative;
  double min_periodicity = 0.5;

  PostPreset effective_preset() const {
    return preset ? *preset : default_preset(method);
  }
  double effective_percentile() const {
    return binarize_percentile ? *binarize_percentile : default_percentile(method);
  }

  /// Throws ErrorKind::Parameter naming the offending field.
  void validate() const;

  /// Flat key/value view, in a stable order, for reports and config files.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
  /// Applies one key=value override. Unknown keys and bad values throw.
  void set(const std::string& key, const std::string& value);
};

/// Parses a flat `key = value` file; `#` starts a comment.
std::vector<std::pair<std::string, std::string>> parse_key_value_text(const std::string& text);
PipelineConfig load_config_file(const std::string& path, PipelineConfig base = {});
std::string config_to_text(const PipelineConfig& config);

/// Raw 8-bit intensities -> Frame (value / 255).
Frame normalize_frame(const std::vector<std::vector<std::uint8_t>>& raw);
Frame normalize_frame(int width, int height, std::span<const std::uint8_t> raw);
/// Frame -> 8-bit by rounding to nearest.
std::vector<std::uint8_t> denormalize_frame(const Frame& frame);

}  // namespace veinpulse
