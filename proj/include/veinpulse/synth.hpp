#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "veinpulse/core.hpp"

namespace veinpulse {

/// A straight vessel through (center_col, center_row). Orientation is in
/// degrees from the +x axis, positive turning toward +y (down the image).
struct VesselSpec {
  double center_row = 60.0;
  double base_width = 6.0;
  double modulation_amplitude = 2.0;
  double orientation_deg = 0.0;
  std::optional<double> center_col;  // unset: image center
};

/// Geometric transillumination phantom: a bright finger band over a dark
/// background, with dark vessels whose width follows the pulse.
struct PhantomSpec {
  int width = 160;
  int height = 120;
  double fps = 30.0;
  double duration_s = 60.0;
  int finger_top = 20;
  int finger_bottom = 99;
  std::vector<VesselSpec> vessels{VesselSpec{}};
  double pulse_bpm = 77.0;
  double background_level = 0.05;
  double tissue_level = 0.75;
  double vessel_level = 0.40;
  double noise_sigma = 0.02;
  double jitter_px_per_frame = 0.0;
  std::uint64_t seed = 0;

  int frame_count() const;
  /// Throws ErrorKind::Spec naming the offending field.
  void validate() const;
};

/// Named starting points: default, nir, speckle, zero-modulation,
/// straight-vertical, two-vessel.
PhantomSpec phantom_preset(const std::string& name);
std::vector<std::string> phantom_preset_names();

/// Flat key = value text. `preset = NAME` (first) selects the base; each
/// `vessel = row, width, amplitude, orientation[, col]` line adds a vessel and
/// the first one replaces the preset's vessel list.
PhantomSpec parse_phantom_spec(const std::string& text);
std::string phantom_spec_to_text(const PhantomSpec& spec);

class GroundTruth {
 public:
  GroundTruth() = default;
  GroundTruth(PhantomSpec spec, std::vector<double> offsets);

  const PhantomSpec& spec() const noexcept { return spec_; }
  int frame_count() const noexcept { return static_cast<int>(offsets_.size()); }

  double time_s(int frame) const { return frame / spec_.fps; }
  /// Cumulative horizontal translation of the scene at a frame.
  double offset_x(int frame) const { return offsets_[static_cast<std::size_t>(frame)]; }
  /// Analytic width base + amplitude * sin(2 pi f t), unrounded.
  double width(int frame, int vessel) const;
  /// Width actually drawn (rounded to px).
  double drawn_width(int frame, int vessel) const;
  /// Signed perpendicular distance of pixel center (x, y) from the centerline.
  double signed_distance(int frame, int vessel, double x, double y) const;
  /// Row where the centerline crosses column x.
  double centerline_row(int frame, int vessel, double x) const;
  /// Column where the centerline crosses row y.
  double centerline_col(int frame, int vessel, double y) const;

  /// Pixels with |distance| <= drawn_width / 2 + margin, clipped to the band.
  BinaryGrid vessel_mask(int frame, double margin = 0.0) const;
  /// Pixels with |distance| <= 0.5 inside the band.
  BinaryGrid centerline_mask(int frame, int vessel) const;
  BinaryGrid finger_mask() const;

 private:
  PhantomSpec spec_;
  std::vector<double> offsets_;
};

struct Phantom {
  VideoSequence video;
  GroundTruth truth;
};

Phantom render_phantom(const PhantomSpec& spec);

}  // namespace veinpulse
