#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "veinpulse/core.hpp"

namespace veinpulse {

enum class TrendStage { Raw, Smoothed, SavitzkyGolay, Derivative };

const char* to_string(TrendStage stage);

struct TrendSeries {
  std::vector<double> values;
  double fps = 0.0;
  TrendStage stage = TrendStage::Raw;

  std::size_t size() const noexcept { return values.size(); }
};

struct HeartRateResult {
  std::vector<int> peak_indices;
  std::vector<double> peak_times;  // seconds, strictly increasing
  int peak_count = 0;
  double duration_s = 0.0;
  double bpm = 0.0;
};

/// Centered mean, edges replicated.
TrendSeries moving_average(const TrendSeries& series, int window);

/// Least-squares polynomial smoothing. Interior samples take the fitted value
/// at the window center; the first and last half-window samples are read
/// off the fit of the first and last full window.
TrendSeries savitzky_golay(const TrendSeries& series, int window, int order);

/// Five-point central differences times fps; three-point next to the ends,
/// one-sided at the ends.
TrendSeries differentiate(const TrendSeries& series);

/// Topographic prominence of each sample index in `peaks` (local maxima).
std::vector<double> peak_prominences(std::span<const double> values, std::span<const int> peaks);

/// Local maxima; a flat top reports its middle sample.
std::vector<int> local_maxima(std::span<const double> values);

/// Local maxima with prominence >= min_prominence, kept greedily by
/// descending prominence while every pair stays at least min_separation_s
/// apart. bpm = count * 60 / duration, duration = samples / fps.
HeartRateResult count_peaks(const TrendSeries& series, double min_prominence, double min_separation_s);

/// 0.25 x interquartile range of the values, raised to `floor`.
double default_min_prominence(std::span<const double> values, double floor);

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

struct Periodicity {
  double frequency_hz = 0.0;   // strongest component in the 40-180 bpm band
  double concentration = 0.0;  // its share of the 0.5-5 Hz power
};

/// Periodogram of the mean-removed series. Power within 0.1 Hz of the
/// strongest in-band frequency, over all power from 0.5 Hz to min(5 Hz,
/// Nyquist). Zero when the series is constant.
Periodicity periodicity(const TrendSeries& series);

struct HeartRateOptions {
  int ma_window = 5;
  int sg_window = 11;
  int sg_order = 3;
  std::optional<double> min_prominence;
  double prominence_floor = 4.0;
  double min_separation_s = 0.33;
  PeakSeries peak_series = PeakSeries::Derivative;
  /// Peaks are reported only when the SG trend's periodicity concentration
  /// reaches this; 0 disables the gate.
  double min_periodicity = 0.5;
};

struct HeartRateAnalysis {
  TrendSeries raw;
  TrendSeries smoothed;
  TrendSeries sg;
  TrendSeries derivative;
  double min_prominence = 0.0;
  Periodicity periodicity;
  int ungated_peak_count = 0;
  HeartRateResult result;
  std::vector<std::string> warnings;
};

/// raw -> moving average -> Savitzky-Golay -> derivative -> peaks.
HeartRateAnalysis analyze_heart_rate(const TrendSeries& raw, const HeartRateOptions& options);

std::string peaks_csv(const HeartRateResult& result);
std::string summary_line(const HeartRateResult& result);
std::string stages_csv(const HeartRateAnalysis& analysis);
/// frame_index,time_s,value for one stage.
std::string stage_csv(const TrendSeries& series);

}  // namespace veinpulse
