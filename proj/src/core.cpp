#include "veinpulse/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace veinpulse {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::NotFound: return "not found";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::EmptyMap: return "empty map";
    case ErrorKind::NoVessel: return "no vessel";
    case ErrorKind::TrackingFailure: return "tracking failure";
    case ErrorKind::Spec: return "spec error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

TrackingFailure::TrackingFailure(int gap_frames, int total_frames, double max_fraction)
    : Error(ErrorKind::TrackingFailure,
            "tracking failure: " + std::to_string(gap_frames) + " of " +
                std::to_string(total_frames) + " frames gapped (limit " +
                std::to_string(static_cast<int>(std::lround(max_fraction * 100.0))) + "%)"),
      gap_frames_(gap_frames),
      total_frames_(total_frames),
      max_fraction_(max_fraction) {}

namespace {

void check_intensities(std::span<const double> pixels) {
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::Parameter, "frame intensity outside [0,1]");
    }
  }
}

}  // namespace

Frame::Frame(int width, int height, std::vector<double> pixels)
    : pixels_(width, height, std::move(pixels)) {
  check_intensities(pixels_.data());
}

Frame::Frame(Grid<double> pixels) : pixels_(std::move(pixels)) {
  check_intensities(pixels_.data());
}

VideoSequence::VideoSequence(std::vector<Frame> frames, double fps)
    : frames_(std::move(frames)), fps_(fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw Error(ErrorKind::Parameter, "fps must be positive");
  }
  for (const auto& f : frames_) {
    if (f.width() != frames_.front().width() || f.height() != frames_.front().height()) {
      throw Error(ErrorKind::Dimension, "frames in a sequence must share dimensions");
    }
  }
}

const char* to_string(ExtractionMethod method) {
  return method == ExtractionMethod::MaxCurvature ? "maxcurv" : "rlt";
}

ExtractionMethod parse_method(const std::string& text) {
  if (text == "maxcurv") return ExtractionMethod::MaxCurvature;
  if (text == "rlt") return ExtractionMethod::RepeatedLineTracking;
  throw Error(ErrorKind::Parameter, "unknown method '" + text + "' (expected maxcurv or rlt)");
}

const char* to_string(PostPreset preset) {
  switch (preset) {
    case PostPreset::PaperMc: return "paper-mc";
    case PostPreset::PaperRlt: return "paper-rlt";
    case PostPreset::PaperRltMedianLast: return "paper-rlt-median-last";
    case PostPreset::None: return "none";
  }
  return "none";
}

PostPreset parse_preset(const std::string& text) {
  if (text == "paper-mc") return PostPreset::PaperMc;
  if (text == "paper-rlt") return PostPreset::PaperRlt;
  if (text == "paper-rlt-median-last") return PostPreset::PaperRltMedianLast;
  if (text == "none") return PostPreset::None;
  throw Error(ErrorKind::Parameter, "unknown preset '" + text + "'");
}

PostPreset default_preset(ExtractionMethod method) {
  return method == ExtractionMethod::MaxCurvature ? PostPreset::PaperMc : PostPreset::PaperRlt;
}

double default_percentile(ExtractionMethod method) {
  return method == ExtractionMethod::MaxCurvature ? 50.0 : 10.0;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorKind::Parameter, field + ": " + why);
  };
  if (edge_half_height < 1) fail("edge_half_height", "must be >= 1");
  if (min_inside_run < 1) fail("min_inside_run", "must be >= 1");
  if (!(curvature_sigma >= 1.0)) fail("curvature_sigma", "must be >= 1");
  if (!(curvature_floor >= 0.0)) fail("curvature_floor", "must be >= 0");
  if (!(curvature_noise_factor >= 0.0)) fail("curvature_noise_factor", "must be >= 0");
  if (rlt_iterations < 0) fail("rlt_iterations", "must be >= 0");
  if (!(rlt_valley_radius > 0.0)) fail("rlt_valley_radius", "must be > 0");
  if (!(rlt_valley_depth >= 0.0)) fail("rlt_valley_depth", "must be >= 0");
  if (binarize_percentile && !(*binarize_percentile >= 0.0 && *binarize_percentile < 100.0)) {
    fail("binarize_percentile", "must be in [0,100)");
  }
  if (morph_radius < 1) fail("morph_radius", "must be >= 1");
  if (median_window < 3 || median_window % 2 == 0) fail("median_window", "must be odd and >= 3");
  if (!(central_band_fraction > 0.0 && central_band_fraction <= 1.0)) {
    fail("central_band_fraction", "must be in (0,1]");
  }
  if (!(match_gate_px > 0.0)) fail("match_gate_px", "must be > 0");
  if (!(max_gap_fraction >= 0.0 && max_gap_fraction <= 1.0)) {
    fail("max_gap_fraction", "must be in [0,1]");
  }
  if (width_columns < 1 || width_columns % 2 == 0) fail("width_columns", "must be odd and >= 1");
  if (ma_window < 1 || ma_window % 2 == 0) fail("ma_window", "must be odd and >= 1");
  if (sg_window < 3 || sg_window % 2 == 0) fail("sg_window", "must be odd and >= 3");
  if (sg_order < 0 || sg_order >= sg_window) fail("sg_order", "must satisfy 0 <= order < window");
  if (peak_min_prominence && !(*peak_min_prominence >= 0.0)) {
    fail("peak_min_prominence", "must be >= 0");
  }
  if (!(peak_prominence_floor >= 0.0)) fail("peak_prominence_floor", "must be >= 0");
  if (!(peak_min_separation_s > 0.0)) fail("peak_min_separation_s", "must be > 0");
  if (!(min_periodicity >= 0.0 && min_periodicity <= 1.0)) fail("min_periodicity", "must be in [0,1]");
}

namespace {

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || !std::isfinite(out)) {
    throw Error(ErrorKind::Parameter, key + ": expected a number, got '" + value + "'");
  }
  return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(ErrorKind::Parameter, key + ": expected an integer, got '" + value + "'");
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> PipelineConfig::to_key_values() const {
  return {
      {"method", to_string(method)},
      {"preset", to_string(effective_preset())},
      {"edge_half_height", std::to_string(edge_half_height)},
      {"min_inside_run", std::to_string(min_inside_run)},
      {"curvature_sigma", fmt_double(curvature_sigma)},
      {"curvature_floor", fmt_double(curvature_floor)},
      {"curvature_noise_factor", fmt_double(curvature_noise_factor)},
      {"curvature_directions",
       curvature_directions == CurvatureDirections::Four ? "four" : "vertical"},
      {"rlt_iterations", std::to_string(rlt_iterations)},
      {"rlt_valley_radius", fmt_double(rlt_valley_radius)},
      {"rlt_valley_depth", fmt_double(rlt_valley_depth)},
      {"seed", std::to_string(seed)},
      {"binarize_percentile", fmt_double(effective_percentile())},
      {"morph_radius", std::to_string(morph_radius)},
      {"median_window", std::to_string(median_window)},
      {"central_band_fraction", fmt_double(central_band_fraction)},
      {"match_gate_px", fmt_double(match_gate_px)},
      {"max_gap_fraction", fmt_double(max_gap_fraction)},
      {"width_columns", std::to_string(width_columns)},
      {"ma_window", std::to_string(ma_window)},
      {"sg_window", std::to_string(sg_window)},
      {"sg_order", std::to_string(sg_order)},
      {"peak_min_prominence", peak_min_prominence ? fmt_double(*peak_min_prominence) : "auto"},
      {"peak_prominence_floor", fmt_double(peak_prominence_floor)},
      {"peak_min_separation_s", fmt_double(peak_min_separation_s)},
      {"peak_series", peak_series == PeakSeries::Derivative ? "derivative" : "sg"},
      {"min_periodicity", fmt_double(min_periodicity)},
  };
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  auto as_int = [&] { return static_cast<int>(parse_integer(key, value)); };
  auto as_double = [&] { return parse_double(key, value); };
  if (key == "method") method = parse_method(value);
  else if (key == "preset") preset = parse_preset(value);
  else if (key == "edge_half_height") edge_half_height = as_int();
  else if (key == "min_inside_run") min_inside_run = as_int();
  else if (key == "curvature_sigma") curvature_sigma = as_double();
  else if (key == "curvature_floor") curvature_floor = as_double();
  else if (key == "curvature_noise_factor") curvature_noise_factor = as_double();
  else if (key == "curvature_directions") {
    if (value == "four") curvature_directions = CurvatureDirections::Four;
    else if (value == "vertical") curvature_directions = CurvatureDirections::VerticalOnly;
    else throw Error(ErrorKind::Parameter, key + ": expected four or vertical");
  } else if (key == "rlt_iterations") rlt_iterations = as_int();
  else if (key == "rlt_valley_radius") rlt_valley_radius = as_double();
  else if (key == "rlt_valley_depth") rlt_valley_depth = as_double();
  else if (key == "seed") {
    const auto s = parse_integer(key, value);
    if (s < 0) throw Error(ErrorKind::Parameter, "seed: must be >= 0");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "binarize_percentile") {
    if (value == "auto") binarize_percentile.reset();
    else binarize_percentile = as_double();
  }
  else if (key == "morph_radius") morph_radius = as_int();
  else if (key == "median_window") median_window = as_int();
  else if (key == "central_band_fraction") central_band_fraction = as_double();
  else if (key == "match_gate_px") match_gate_px = as_double();
  else if (key == "max_gap_fraction") max_gap_fraction = as_double();
  else if (key == "width_columns") width_columns = as_int();
  else if (key == "ma_window") ma_window = as_int();
  else if (key == "sg_window") sg_window = as_int();
  else if (key == "sg_order") sg_order = as_int();
  else if (key == "peak_min_prominence") {
    if (value == "auto") peak_min_prominence.reset();
    else peak_min_prominence = as_double();
  } else if (key == "peak_prominence_floor") peak_prominence_floor = as_double();
  else if (key == "peak_min_separation_s") peak_min_separation_s = as_double();
  else if (key == "peak_series") {
    if (value == "derivative") peak_series = PeakSeries::Derivative;
    else if (value == "sg") peak_series = PeakSeries::SavitzkyGolay;
    else throw Error(ErrorKind::Parameter, key + ": expected derivative or sg");
  } else if (key == "min_periodicity") {
    min_periodicity = as_double();
  } else {
    throw Error(ErrorKind::Parameter, "unknown config key '" + key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> parse_key_value_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Parameter,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorKind::Parameter, "line " + std::to_string(line_no) + ": empty key");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

PipelineConfig load_config_file(const std::string& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::NotFound, "config file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  for (const auto& [k, v] : parse_key_value_text(buf.str())) base.set(k, v);
  base.validate();
  return base;
}

std::string config_to_text(const PipelineConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.to_key_values()) out += k + " = " + v + "\n";
  return out;
}

Frame normalize_frame(const std::vector<std::vector<std::uint8_t>>& raw) {
  if (raw.empty() || raw.front().empty()) {
    throw Error(ErrorKind::Dimension, "raw frame is empty");
  }
  const auto width = raw.front().size();
  std::vector<double> pixels;
  pixels.reserve(width * raw.size());
  for (const auto& row : raw) {
    if (row.size() != width) throw Error(ErrorKind::Dimension, "raw frame rows are ragged");
    for (auto v : row) pixels.push_back(static_cast<double>(v) / 255.0);
  }
  return Frame(static_cast<int>(width), static_cast<int>(raw.size()), std::move(pixels));
}

Frame normalize_frame(int width, int height, std::span<const std::uint8_t> raw) {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::Dimension, "raw frame is empty");
  if (raw.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorKind::Dimension, "raw buffer length does not match width x height");
  }
  std::vector<double> pixels(raw.size());
  std::transform(raw.begin(), raw.end(), pixels.begin(),
                 [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
  return Frame(width, height, std::move(pixels));
}

std::vector<std::uint8_t> denormalize_frame(const Frame& frame) {
  std::vector<std::uint8_t> out(frame.pixels().size());
  std::transform(frame.pixels().begin(), frame.pixels().end(), out.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
  });
  return out;
}

}  // namespace veinpulse
