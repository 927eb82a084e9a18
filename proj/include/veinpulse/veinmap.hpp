#pragma once

#include <cstdint>

#include "veinpulse/core.hpp"
#include "veinpulse/roi.hpp"

namespace veinpulse {

/// Per-pixel vein likelihood: curvature scores or line-tracking visit counts.
/// Non-negative, and zero outside the finger mask.
struct ScoreField {
  Grid<double> scores;
  ExtractionMethod method = ExtractionMethod::MaxCurvature;

  int width() const noexcept { return scores.width(); }
  int height() const noexcept { return scores.height(); }
};

struct VeinMap {
  BinaryGrid vein;

  int width() const noexcept { return vein.width(); }
  int height() const noexcept { return vein.height(); }
  bool at(int x, int y) const { return vein.at(x, y) != 0; }
  std::size_t count() const;

  friend bool operator==(const VeinMap&, const VeinMap&) = default;
};

struct MaxCurvatureOptions {
  double sigma = 1.0;
  /// A curvature maximum must exceed max(curvature_floor, noise_factor x
  /// robust sigma of the curvature inside the mask) to be scored. Both zero
  /// keeps every positive maximum.
  double curvature_floor = 0.0;
  double noise_factor = 0.0;
  CurvatureDirections directions = CurvatureDirections::Four;
};

/// Maximum-curvature vein scores. The image is smoothed with a Gaussian of
/// scale sigma; along each profile direction the curvature
///   k(z) = P''(z) / (1 + P'(z)^2)^(3/2)
/// is scanned for runs of k > 0 inside the mask, and every local maximum of k
/// in a run deposits k * (run length) at its pixel. The accumulated plane is
/// then passed through the center-connection filter
///   C(p) = min(max(V(p+d), V(p+2d)), max(V(p-d), V(p-2d)))
/// taking the maximum over the four directions d. A side whose two samples
/// both fall outside the mask is dropped from the min.
ScoreField max_curvature(const Frame& frame, const FingerMask& mask, const MaxCurvatureOptions& options);
ScoreField max_curvature(const Frame& frame, const FingerMask& mask, double sigma);

/// 1.4826 x median absolute deviation.
double robust_sigma(std::vector<double> values);

/// The raw curvature plane before the connection filter; exposed for tests.
Grid<double> curvature_scores(const Frame& frame, const FingerMask& mask,
                              const MaxCurvatureOptions& options);

struct LineTrackingOptions {
  int iterations = 3000;
  double valley_radius = 6.0;
  /// min(flank) - center must reach this for a step to be accepted.
  double valley_depth = 0.01;
  std::uint64_t seed = 0;
};

/// Repeated line tracking. Each walk starts at a uniformly drawn mask pixel
/// with a random heading among the eight neighbours and repeatedly steps to
/// one of the neighbours within 45 degrees of the heading. A candidate is
/// acceptable when the profile perpendicular to its step, sampled
/// `valley_radius` px either side, is a valley at least `valley_depth` deep.
/// The step is drawn among acceptable candidates with weight depth x 2 for
/// straight ahead and depth x 1 for the turns. Pixels visited by a walk that
/// made at least one step are counted once each in the locus space.
///
/// Walk i draws from its own generator derived from (seed, i), so the result
/// does not depend on the thread count.
ScoreField repeated_line_tracking(const Frame& frame, const FingerMask& mask,
                                  const LineTrackingOptions& options);

/// Vein = nonzero scores at or above the given percentile (linear
/// interpolation) of the nonzero scores. Throws EmptyMap when every score is
/// zero.
VeinMap binarize(const ScoreField& field, double percentile);

/// Percentile of the nonzero scores, as used by binarize.
double nonzero_percentile(const ScoreField& field, double percentile);

}  // namespace veinpulse
