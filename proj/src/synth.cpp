#include "veinpulse/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "veinpulse/parallel.hpp"
#include "veinpulse/random.hpp"

namespace veinpulse {

namespace {

constexpr double kEdgeBlur = 2.0;
constexpr double kVesselBlur = 1.0;
constexpr std::uint64_t kJitterStream = 0x6a09e667f3bcc909ULL;
constexpr std::uint64_t kNoiseStream = 0xbb67ae8584caa73bULL;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Box of the given width centered at 0, blurred by a Gaussian of `blur`.
double blurred_box(double d, double width, double blur) {
  return normal_cdf((0.5 * width - d) / blur) - normal_cdf((-0.5 * width - d) / blur);
}

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

[[noreturn]] void spec_error(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::Spec, field + ": " + why);
}

}  // namespace

int PhantomSpec::frame_count() const {
  return static_cast<int>(std::lround(duration_s * fps));
}

void PhantomSpec::validate() const {
  if (width < 8) spec_error("width", "must be >= 8");
  if (height < 8) spec_error("height", "must be >= 8");
  if (!(fps > 0.0)) spec_error("fps", "must be > 0");
  if (!(duration_s > 0.0)) spec_error("duration_s", "must be > 0");
  if (frame_count() < 1) spec_error("duration_s", "yields no frames");
  if (finger_top < 0 || finger_top >= height) spec_error("finger_top", "outside frame");
  if (finger_bottom < finger_top || finger_bottom >= height) {
    spec_error("finger_bottom", "outside frame or above finger_top");
  }
  if (!(pulse_bpm >= 40.0 && pulse_bpm <= 180.0)) spec_error("pulse_bpm", "must be in [40,180]");
  auto level = [](const std::string& field, double v) {
    if (!(v >= 0.0 && v <= 1.0)) spec_error(field, "must be in [0,1]");
  };
  level("background_level", background_level);
  level("tissue_level", tissue_level);
  level("vessel_level", vessel_level);
  if (!(vessel_level < tissue_level)) spec_error("vessel_level", "must be below tissue_level");
  if (!(noise_sigma >= 0.0)) spec_error("noise_sigma", "must be >= 0");
  if (!(jitter_px_per_frame >= 0.0)) spec_error("jitter_px_per_frame", "must be >= 0");
  for (std::size_t i = 0; i < vessels.size(); ++i) {
    const auto& v = vessels[i];
    const std::string field = "vessel[" + std::to_string(i) + "]";
    if (!(v.base_width >= 1.0)) spec_error(field, "base_width must be >= 1");
    if (!(v.modulation_amplitude >= 0.0) || v.modulation_amplitude >= v.base_width) {
      spec_error(field, "modulation_amplitude must be in [0, base_width)");
    }
    const double half = 0.5 * (v.base_width + v.modulation_amplitude);
    const bool vertical = std::abs(std::cos(radians(v.orientation_deg))) < 1e-9;
    if (!vertical && (v.center_row - half < finger_top || v.center_row + half > finger_bottom)) {
      spec_error(field, "vessel outside finger band");
    }
    if (vertical && (v.center_row < finger_top || v.center_row > finger_bottom)) {
      spec_error(field, "vessel outside finger band");
    }
    const double col = v.center_col.value_or(0.5 * (width - 1));
    if (col < 0.0 || col > width - 1) spec_error(field, "center_col outside frame");
  }
}

PhantomSpec phantom_preset(const std::string& name) {
  PhantomSpec spec;
  if (name == "default") {
    spec.vessels = {VesselSpec{60.0, 6.0, 2.0, 2.0, std::nullopt}};
  } else if (name == "nir") {
    // Near-infrared-like: deeper vessel shadow, brighter tissue.
    spec.pulse_bpm = 75.0;
    spec.tissue_level = 0.80;
    spec.vessel_level = 0.30;
    spec.vessels = {VesselSpec{60.0, 6.0, 2.0, 2.0, std::nullopt}};
  } else if (name == "speckle") {
    spec.noise_sigma = 0.06;
    spec.vessels = {VesselSpec{60.0, 6.0, 2.0, 2.0, std::nullopt}};
  } else if (name == "zero-modulation") {
    spec.vessels = {VesselSpec{60.0, 6.0, 0.0, 2.0, std::nullopt}};
  } else if (name == "straight-vertical") {
    spec.width = 128;
    spec.vessels = {VesselSpec{60.0, 5.0, 0.0, 90.0, 64.0}};
  } else if (name == "two-vessel") {
    spec.vessels = {VesselSpec{45.0, 6.0, 2.0, 0.0, std::nullopt},
                    VesselSpec{80.0, 6.0, 2.0, 0.0, std::nullopt}};
  } else {
    spec_error("preset", "unknown phantom preset '" + name + "'");
  }
  return spec;
}

std::vector<std::string> phantom_preset_names() {
  return {"default", "nir", "speckle", "zero-modulation", "straight-vertical", "two-vessel"};
}

namespace {

double spec_double(const std::string& field, const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    spec_error(field, "expected a number, got '" + text + "'");
  }
  return v;
}

int spec_int(const std::string& field, const std::string& text) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    spec_error(field, "expected an integer, got '" + text + "'");
  }
  return v;
}

VesselSpec parse_vessel(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? std::string{} : item.substr(b, e - b + 1));
  }
  if (parts.size() != 4 && parts.size() != 5) {
    spec_error("vessel", "expected row, width, amplitude, orientation[, col]");
  }
  VesselSpec v;
  v.center_row = spec_double("vessel", parts[0]);
  v.base_width = spec_double("vessel", parts[1]);
  v.modulation_amplitude = spec_double("vessel", parts[2]);
  v.orientation_deg = spec_double("vessel", parts[3]);
  if (parts.size() == 5) v.center_col = spec_double("vessel", parts[4]);
  return v;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

PhantomSpec parse_phantom_spec(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  try {
    entries = parse_key_value_text(text);
  } catch (const Error& e) {
    throw Error(ErrorKind::Spec, e.what());
  }
  PhantomSpec spec;
  bool replaced_vessels = false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [key, value] = entries[i];
    if (key == "preset") {
      if (i != 0) spec_error("preset", "must be the first entry");
      spec = phantom_preset(value);
    } else if (key == "width") spec.width = spec_int(key, value);
    else if (key == "height") spec.height = spec_int(key, value);
    else if (key == "fps") spec.fps = spec_double(key, value);
    else if (key == "duration_s") spec.duration_s = spec_double(key, value);
    else if (key == "finger_top") spec.finger_top = spec_int(key, value);
    else if (key == "finger_bottom") spec.finger_bottom = spec_int(key, value);
    else if (key == "pulse_bpm") spec.pulse_bpm = spec_double(key, value);
    else if (key == "background_level") spec.background_level = spec_double(key, value);
    else if (key == "tissue_level") spec.tissue_level = spec_double(key, value);
    else if (key == "vessel_level") spec.vessel_level = spec_double(key, value);
    else if (key == "noise_sigma") spec.noise_sigma = spec_double(key, value);
    else if (key == "jitter_px_per_frame") spec.jitter_px_per_frame = spec_double(key, value);
    else if (key == "seed") {
      const double s = spec_double(key, value);
      if (s < 0 || s != std::floor(s)) spec_error(key, "must be a non-negative integer");
      spec.seed = static_cast<std::uint64_t>(s);
    } else if (key == "vessel") {
      if (!replaced_vessels) {
        spec.vessels.clear();
        replaced_vessels = true;
      }
      spec.vessels.push_back(parse_vessel(value));
    } else if (key == "vessels" && value == "none") {
      spec.vessels.clear();
      replaced_vessels = true;
    } else {
      spec_error(key, "unknown phantom spec key");
    }
  }
  spec.validate();
  return spec;
}

std::string phantom_spec_to_text(const PhantomSpec& spec) {
  std::ostringstream os;
  os << "width = " << spec.width << "\n"
     << "height = " << spec.height << "\n"
     << "fps = " << num(spec.fps) << "\n"
     << "duration_s = " << num(spec.duration_s) << "\n"
     << "finger_top = " << spec.finger_top << "\n"
     << "finger_bottom = " << spec.finger_bottom << "\n"
     << "pulse_bpm = " << num(spec.pulse_bpm) << "\n"
     << "background_level = " << num(spec.background_level) << "\n"
     << "tissue_level = " << num(spec.tissue_level) << "\n"
     << "vessel_level = " << num(spec.vessel_level) << "\n"
     << "noise_sigma = " << num(spec.noise_sigma) << "\n"
     << "jitter_px_per_frame = " << num(spec.jitter_px_per_frame) << "\n"
     << "seed = " << spec.seed << "\n";
  if (spec.vessels.empty()) os << "vessels = none\n";
  for (const auto& v : spec.vessels) {
    os << "vessel = " << num(v.center_row) << ", " << num(v.base_width) << ", "
       << num(v.modulation_amplitude) << ", " << num(v.orientation_deg);
    if (v.center_col) os << ", " << num(*v.center_col);
    os << "\n";
  }
  return os.str();
}

GroundTruth::GroundTruth(PhantomSpec spec, std::vector<double> offsets)
    : spec_(std::move(spec)), offsets_(std::move(offsets)) {}

double GroundTruth::width(int frame, int vessel) const {
  const auto& v = spec_.vessels[static_cast<std::size_t>(vessel)];
  const double f = spec_.pulse_bpm / 60.0;
  return v.base_width + v.modulation_amplitude * std::sin(2.0 * std::numbers::pi * f * time_s(frame));
}

double GroundTruth::drawn_width(int frame, int vessel) const {
  return std::round(width(frame, vessel));
}

double GroundTruth::signed_distance(int frame, int vessel, double x, double y) const {
  const auto& v = spec_.vessels[static_cast<std::size_t>(vessel)];
  const double cx = v.center_col.value_or(0.5 * (spec_.width - 1));
  const double th = radians(v.orientation_deg);
  const double xs = x - offset_x(frame);
  return -(xs - cx) * std::sin(th) + (y - v.center_row) * std::cos(th);
}

double GroundTruth::centerline_row(int frame, int vessel, double x) const {
  const auto& v = spec_.vessels[static_cast<std::size_t>(vessel)];
  const double cx = v.center_col.value_or(0.5 * (spec_.width - 1));
  const double th = radians(v.orientation_deg);
  return v.center_row + (x - offset_x(frame) - cx) * std::tan(th);
}

double GroundTruth::centerline_col(int frame, int vessel, double y) const {
  const auto& v = spec_.vessels[static_cast<std::size_t>(vessel)];
  const double cx = v.center_col.value_or(0.5 * (spec_.width - 1));
  const double th = radians(v.orientation_deg);
  return cx + offset_x(frame) + (y - v.center_row) * std::cos(th) / std::sin(th);
}

BinaryGrid GroundTruth::vessel_mask(int frame, double margin) const {
  BinaryGrid out(spec_.width, spec_.height, 0);
  for (int y = spec_.finger_top; y <= spec_.finger_bottom; ++y) {
    for (int x = 0; x < spec_.width; ++x) {
      for (int k = 0; k < static_cast<int>(spec_.vessels.size()); ++k) {
        if (std::abs(signed_distance(frame, k, x, y)) <= 0.5 * drawn_width(frame, k) + margin) {
          out.at(x, y) = 1;
        }
      }
    }
  }
  return out;
}

BinaryGrid GroundTruth::centerline_mask(int frame, int vessel) const {
  BinaryGrid out(spec_.width, spec_.height, 0);
  for (int y = spec_.finger_top; y <= spec_.finger_bottom; ++y) {
    for (int x = 0; x < spec_.width; ++x) {
      if (std::abs(signed_distance(frame, vessel, x, y)) <= 0.5) out.at(x, y) = 1;
    }
  }
  return out;
}

BinaryGrid GroundTruth::finger_mask() const {
  BinaryGrid out(spec_.width, spec_.height, 0);
  for (int y = spec_.finger_top; y <= spec_.finger_bottom; ++y) {
    for (int x = 0; x < spec_.width; ++x) out.at(x, y) = 1;
  }
  return out;
}

Phantom render_phantom(const PhantomSpec& spec) {
  spec.validate();
  const int n = spec.frame_count();

  // Cumulative horizontal jitter, reflected to stay within a quarter width.
  std::vector<double> offsets(static_cast<std::size_t>(n), 0.0);
  if (spec.jitter_px_per_frame > 0.0) {
    SplitMix64 rng(derive_seed(spec.seed, kJitterStream));
    std::uniform_real_distribution<double> step(-spec.jitter_px_per_frame, spec.jitter_px_per_frame);
    const double bound = 0.25 * spec.width;
    double pos = 0.0;
    for (int t = 1; t < n; ++t) {
      pos += step(rng);
      while (pos > bound || pos < -bound) pos = pos > bound ? 2.0 * bound - pos : -2.0 * bound - pos;
      offsets[static_cast<std::size_t>(t)] = pos;
    }
  }
  GroundTruth truth(spec, std::move(offsets));

  std::vector<double> band(static_cast<std::size_t>(spec.height));
  for (int y = 0; y < spec.height; ++y) {
    band[static_cast<std::size_t>(y)] = normal_cdf((y - (spec.finger_top - 0.5)) / kEdgeBlur) -
                                        normal_cdf((y - (spec.finger_bottom + 0.5)) / kEdgeBlur);
  }

  std::vector<Frame> frames(static_cast<std::size_t>(n));
  parallel_for(n, [&](int t) {
    SplitMix64 rng(derive_seed(spec.seed ^ kNoiseStream, static_cast<std::uint64_t>(t)));
    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
    std::vector<double> widths;
    for (int k = 0; k < static_cast<int>(spec.vessels.size()); ++k) widths.push_back(truth.drawn_width(t, k));

    std::vector<double> pixels(static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height));
    for (int y = 0; y < spec.height; ++y) {
      const double b = band[static_cast<std::size_t>(y)];
      for (int x = 0; x < spec.width; ++x) {
        double shade = 0.0;
        for (int k = 0; k < static_cast<int>(widths.size()); ++k) {
          const double d = truth.signed_distance(t, k, x, y);
          shade = std::max(shade, blurred_box(d, widths[static_cast<std::size_t>(k)], kVesselBlur));
        }
        double value = spec.background_level + (spec.tissue_level - spec.background_level) * b +
                       (spec.vessel_level - spec.tissue_level) * shade * b;
        if (spec.noise_sigma > 0.0) value += noise(rng);
        pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(spec.width) + static_cast<std::size_t>(x)] =
            std::clamp(value, 0.0, 1.0);
      }
    }
    frames[static_cast<std::size_t>(t)] = Frame(spec.width, spec.height, std::move(pixels));
  });
  return Phantom{VideoSequence(std::move(frames), spec.fps), std::move(truth)};
}

}  // namespace veinpulse
