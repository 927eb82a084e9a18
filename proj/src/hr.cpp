#include "veinpulse/hr.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace veinpulse {

const char* to_string(TrendStage stage) {
  switch (stage) {
    case TrendStage::Raw: return "raw";
    case TrendStage::Smoothed: return "smoothed";
    case TrendStage::SavitzkyGolay: return "sg";
    case TrendStage::Derivative: return "derivative";
  }
  return "raw";
}

namespace {

void check_finite(const TrendSeries& s) {
  for (double v : s.values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Parameter, "series contains non-finite values");
  }
}

}  // namespace

TrendSeries moving_average(const TrendSeries& series, int window) {
  const int n = static_cast<int>(series.size());
  if (window < 1 || window % 2 == 0 || window > n) {
    throw Error(ErrorKind::Parameter, "moving average window must be odd, >= 1 and <= length");
  }
  check_finite(series);
  const int r = window / 2;
  TrendSeries out{std::vector<double>(static_cast<std::size_t>(n)), series.fps, TrendStage::Smoothed};
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int k = -r; k <= r; ++k) sum += series.values[static_cast<std::size_t>(std::clamp(i + k, 0, n - 1))];
    out.values[static_cast<std::size_t>(i)] = sum / window;
  }
  return out;
}

TrendSeries savitzky_golay(const TrendSeries& series, int window, int order) {
  const int n = static_cast<int>(series.size());
  if (window < 3 || window % 2 == 0) throw Error(ErrorKind::Parameter, "SG window must be odd and >= 3");
  if (order < 0 || order >= window) throw Error(ErrorKind::Parameter, "SG order must be < window");
  if (window > n) throw Error(ErrorKind::Parameter, "SG window longer than series");
  check_finite(series);

  const int half = window / 2;
  // Offsets scaled to [-1, 1] keep the Vandermonde matrix well conditioned.
  Eigen::MatrixXd vander(window, order + 1);
  for (int i = 0; i < window; ++i) {
    const double u = static_cast<double>(i - half) / half;
    double p = 1.0;
    for (int j = 0; j <= order; ++j) {
      vander(i, j) = p;
      p *= u;
    }
  }
  // hat(r, :) maps a window of samples to the fitted value at offset r.
  const Eigen::MatrixXd fit = vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
  const Eigen::MatrixXd hat = vander * fit;

  auto apply = [&](int row, int first) {
    double acc = 0.0;
    for (int k = 0; k < window; ++k) acc += hat(row, k) * series.values[static_cast<std::size_t>(first + k)];
    return acc;
  };

  TrendSeries out{std::vector<double>(static_cast<std::size_t>(n)), series.fps, TrendStage::SavitzkyGolay};
  for (int i = 0; i < n; ++i) {
    if (i < half) {
      out.values[static_cast<std::size_t>(i)] = apply(i, 0);
    } else if (i >= n - half) {
      out.values[static_cast<std::size_t>(i)] = apply(i - (n - window), n - window);
    } else {
      out.values[static_cast<std::size_t>(i)] = apply(half, i - half);
    }
  }
  return out;
}

TrendSeries differentiate(const TrendSeries& series) {
  const int n = static_cast<int>(series.size());
  if (n < 3) throw Error(ErrorKind::Parameter, "differentiate needs at least 3 samples");
  if (!(series.fps > 0.0)) throw Error(ErrorKind::Parameter, "fps must be positive");
  check_finite(series);
  const auto& v = series.values;
  TrendSeries out{std::vector<double>(static_cast<std::size_t>(n)), series.fps, TrendStage::Derivative};
  auto at = [&](int i) { return v[static_cast<std::size_t>(i)]; };
  out.values[0] = (v[1] - v[0]) * series.fps;
  for (int i = 1; i < n - 1; ++i) {
    // Five-point stencil where both neighbours exist, else 3-point central.
    const double d = (i >= 2 && i <= n - 3) ? (at(i - 2) - 8 * at(i - 1) + 8 * at(i + 1) - at(i + 2)) / 12.0
                                            : (at(i + 1) - at(i - 1)) * 0.5;
    out.values[static_cast<std::size_t>(i)] = d * series.fps;
  }
  out.values[static_cast<std::size_t>(n - 1)] =
      (v[static_cast<std::size_t>(n - 1)] - v[static_cast<std::size_t>(n - 2)]) * series.fps;
  return out;
}

std::vector<int> local_maxima(std::span<const double> values) {
  std::vector<int> peaks;
  const int n = static_cast<int>(values.size());
  int i = 1;
  while (i < n - 1) {
    if (values[static_cast<std::size_t>(i - 1)] < values[static_cast<std::size_t>(i)]) {
      int ahead = i + 1;
      while (ahead < n - 1 && values[static_cast<std::size_t>(ahead)] == values[static_cast<std::size_t>(i)]) ++ahead;
      if (values[static_cast<std::size_t>(ahead)] < values[static_cast<std::size_t>(i)]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }
  return peaks;
}

std::vector<double> peak_prominences(std::span<const double> values, std::span<const int> peaks) {
  std::vector<double> out;
  out.reserve(peaks.size());
  const int n = static_cast<int>(values.size());
  for (int p : peaks) {
    const double height = values[static_cast<std::size_t>(p)];
    double left_min = height;
    for (int i = p - 1; i >= 0 && values[static_cast<std::size_t>(i)] <= height; --i) {
      left_min = std::min(left_min, values[static_cast<std::size_t>(i)]);
    }
    double right_min = height;
    for (int i = p + 1; i < n && values[static_cast<std::size_t>(i)] <= height; ++i) {
      right_min = std::min(right_min, values[static_cast<std::size_t>(i)]);
    }
    out.push_back(height - std::max(left_min, right_min));
  }
  return out;
}

HeartRateResult count_peaks(const TrendSeries& series, double min_prominence, double min_separation_s) {
  if (!(min_separation_s > 0.0)) throw Error(ErrorKind::Parameter, "min separation must be > 0");
  if (!(series.fps > 0.0)) throw Error(ErrorKind::Parameter, "fps must be positive");
  check_finite(series);

  const auto candidates = local_maxima(series.values);
  const auto prominence = peak_prominences(series.values, candidates);

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return prominence[a] > prominence[b]; });

  std::vector<int> kept;
  for (std::size_t idx : order) {
    if (prominence[idx] < min_prominence || prominence[idx] <= 0.0) continue;
    const int p = candidates[idx];
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](int q) {
      return std::abs(p - q) / series.fps >= min_separation_s;
    });
    if (clear) kept.push_back(p);
  }
  std::sort(kept.begin(), kept.end());

  HeartRateResult r;
  r.peak_indices = kept;
  for (int p : kept) r.peak_times.push_back(p / series.fps);
  r.peak_count = static_cast<int>(kept.size());
  r.duration_s = static_cast<double>(series.size()) / series.fps;
  r.bpm = r.duration_s > 0.0 ? r.peak_count * 60.0 / r.duration_s : 0.0;
  return r;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::Parameter, "quantile of empty series");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

double default_min_prominence(std::span<const double> values, double floor) {
  std::vector<double> v(values.begin(), values.end());
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  return std::max(0.25 * iqr, floor);
}

Periodicity periodicity(const TrendSeries& series) {
  const auto n = series.values.size();
  Periodicity out;
  if (n < 2) return out;
  double mean = 0.0;
  for (double v : series.values) mean += v;
  mean /= static_cast<double>(n);
  const double df = series.fps / static_cast<double>(n);
  const double top = std::min(5.0, 0.5 * series.fps);
  std::vector<std::pair<double, double>> spectrum;
  for (std::size_t k = 1; static_cast<double>(k) * df <= top; ++k) {
    const double f = static_cast<double>(k) * df;
    if (f < 0.5) continue;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = 2.0 * std::numbers::pi * f * static_cast<double>(i) / series.fps;
      re += (series.values[i] - mean) * std::cos(phase);
      im -= (series.values[i] - mean) * std::sin(phase);
    }
    spectrum.emplace_back(f, re * re + im * im);
  }
  double total = 0.0;
  double best = 0.0;
  for (const auto& [f, p] : spectrum) {
    total += p;
    if (f >= 40.0 / 60.0 && f <= 180.0 / 60.0 && p > best) {
      best = p;
      out.frequency_hz = f;
    }
  }
  if (!(total > 0.0) || best == 0.0) return Periodicity{};
  double near = 0.0;
  for (const auto& [f, p] : spectrum) {
    if (std::abs(f - out.frequency_hz) <= 0.1) near += p;
  }
  out.concentration = near / total;
  return out;
}

HeartRateAnalysis analyze_heart_rate(const TrendSeries& raw, const HeartRateOptions& options) {
  HeartRateAnalysis a;
  a.raw = raw;
  a.raw.stage = TrendStage::Raw;
  a.smoothed = moving_average(a.raw, options.ma_window);
  a.sg = savitzky_golay(a.smoothed, options.sg_window, options.sg_order);
  a.derivative = differentiate(a.sg);

  const TrendSeries& target = options.peak_series == PeakSeries::Derivative ? a.derivative : a.sg;
  a.min_prominence = options.min_prominence ? *options.min_prominence
                                            : default_min_prominence(target.values, options.prominence_floor);
  a.result = count_peaks(target, a.min_prominence, options.min_separation_s);
  a.ungated_peak_count = a.result.peak_count;
  a.periodicity = periodicity(a.sg);

  bool gated = false;
  if (options.min_periodicity > 0.0 && a.periodicity.concentration < options.min_periodicity) {
    std::ostringstream os;
    os.precision(3);
    os << "width trend is not periodic (concentration " << a.periodicity.concentration << " < "
       << options.min_periodicity << "); " << a.ungated_peak_count << " candidate peaks discarded";
    a.warnings.push_back(os.str());
    a.result.peak_indices.clear();
    a.result.peak_times.clear();
    a.result.peak_count = 0;
    a.result.bpm = 0.0;
    gated = true;
  }

  const double spread = quantile(a.raw.values, 0.95) - quantile(a.raw.values, 0.05);
  if (spread < 1.0) {
    a.warnings.push_back("width series shows no modulation above 1 px; peaks are likely noise");
  }
  if (a.result.peak_count == 0) {
    if (!gated) a.warnings.push_back("no peaks detected");
  } else if (a.result.bpm < 40.0 || a.result.bpm > 180.0) {
    a.warnings.push_back("heart rate outside the 40-180 bpm physiological band");
  }
  return a;
}

std::string peaks_csv(const HeartRateResult& result) {
  std::ostringstream os;
  os.precision(10);
  os << "peak_index,peak_time_s\n";
  for (std::size_t i = 0; i < result.peak_indices.size(); ++i) {
    os << result.peak_indices[i] << ',' << result.peak_times[i] << '\n';
  }
  return os.str();
}

std::string summary_line(const HeartRateResult& result) {
  std::ostringstream os;
  os.precision(6);
  os << "peak_count=" << result.peak_count << " duration_s=" << result.duration_s << " bpm=" << result.bpm;
  return os.str();
}

std::string stage_csv(const TrendSeries& series) {
  std::ostringstream os;
  os.precision(10);
  os << "frame_index,time_s,value\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    os << i << ',' << static_cast<double>(i) / series.fps << ',' << series.values[i] << '\n';
  }
  return os.str();
}

std::string stages_csv(const HeartRateAnalysis& a) {
  std::ostringstream os;
  os.precision(10);
  os << "frame_index,time_s,raw,smoothed,sg,derivative\n";
  for (std::size_t i = 0; i < a.raw.size(); ++i) {
    os << i << ',' << static_cast<double>(i) / a.raw.fps << ',' << a.raw.values[i] << ',' << a.smoothed.values[i]
       << ',' << a.sg.values[i] << ',' << a.derivative.values[i] << '\n';
  }
  return os.str();
}

}  // namespace veinpulse
