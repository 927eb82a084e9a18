#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "veinpulse/errors.hpp"
#include "veinpulse/image_io.hpp"
#include "veinpulse/ingest.hpp"
#include "veinpulse/pipeline.hpp"
#include "veinpulse/synth.hpp"

namespace veinpulse::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct RunOptions {
  std::string frames;
  std::string pattern = "*.pgm";
  double fps = 0.0;
  std::optional<std::string> method;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config;
  std::vector<std::string> sets;
  bool save_maps = false;
};

struct SynthOptions {
  std::string spec;
  std::string phantom;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

class Stopwatch {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::Parameter, "expected key=value, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::string frame_name(const std::string& prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu.pgm", prefix.c_str(), index);
  return buf;
}

// Defaults, then the config file, then the dedicated flags, then --set.
PipelineConfig build_config(const RunOptions& o) {
  PipelineConfig config;
  if (!o.config.empty()) config = load_config_file(o.config);
  if (o.method) config.set("method", *o.method);
  if (o.preset) config.set("preset", *o.preset);
  if (o.seed) config.seed = *o.seed;
  for (const auto& s : o.sets) {
    const auto [key, value] = split_assignment(s);
    config.set(key, value);
  }
  config.validate();
  return config;
}

json config_json(const PipelineConfig& config) {
  json j = json::object();
  for (const auto& [k, v] : config.to_key_values()) j[k] = v;
  return j;
}

json input_json(const RunOptions& o, const VideoSequence& video) {
  return {{"frames", o.frames},
          {"pattern", o.pattern},
          {"fps", o.fps},
          {"frame_count", video.size()},
          {"width", video.width()},
          {"height", video.height()}};
}

void write_report(const fs::path& path, const json& report) { write_text(path, report.dump(2) + "\n"); }

void write_maps(const fs::path& dir, const SequenceExtraction& maps, json& outputs) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < maps.raw.size(); ++i) {
    write_binary_pgm(dir / frame_name("raw", i), maps.raw[i].vein);
    write_binary_pgm(dir / frame_name("post", i), maps.post[i].vein);
  }
  outputs["maps_dir"] = dir.string();
  outputs["map_count"] = maps.raw.size() * 2;
}

VideoSequence load(const RunOptions& o) {
  return load_sequence(SequenceManifest{o.frames, o.pattern, o.fps});
}

double vein_fraction(const std::vector<VeinMap>& maps) {
  std::size_t on = 0;
  std::size_t all = 0;
  for (const auto& m : maps) {
    on += m.count();
    all += static_cast<std::size_t>(m.width()) * static_cast<std::size_t>(m.height());
  }
  return all == 0 ? 0.0 : static_cast<double>(on) / static_cast<double>(all);
}

int cmd_extract(const RunOptions& o, std::ostream& out) {
  const PipelineConfig config = build_config(o);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  Stopwatch clock;
  json timings;
  const VideoSequence video = load(o);
  timings["ingest"] = clock.lap_ms();
  const auto maps = extract_sequence(video, config);
  timings["extract"] = clock.lap_ms();

  json outputs;
  write_maps(dir / "maps", maps, outputs);
  write_text(dir / "effective.cfg", config_to_text(config));
  outputs["effective_config"] = (dir / "effective.cfg").string();
  outputs["report"] = (dir / "report.json").string();
  timings["write"] = clock.lap_ms();

  json report{{"command", "extract"},
              {"status", "ok"},
              {"config", config_json(config)},
              {"input", input_json(o, video)},
              {"outputs", outputs},
              {"extraction",
               {{"empty_frames", maps.empty_frames},
                {"raw_vein_fraction", vein_fraction(maps.raw)},
                {"post_vein_fraction", vein_fraction(maps.post)}}},
              {"timings_ms", timings}};
  write_report(dir / "report.json", report);
  out << "frames=" << video.size() << " empty_frames=" << maps.empty_frames << " maps=" << (dir / "maps").string()
      << "\n";
  return kExitOk;
}

int cmd_monitor(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const PipelineConfig config = build_config(o);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_text(dir / "effective.cfg", config_to_text(config));

  Stopwatch clock;
  json timings;
  json report{{"command", "monitor"}, {"status", "ok"}, {"config", config_json(config)}};
  const VideoSequence video = load(o);
  timings["ingest"] = clock.lap_ms();
  report["input"] = input_json(o, video);
  const auto maps = extract_sequence(video, config);
  timings["extract"] = clock.lap_ms();

  WidthSeries widths;
  try {
    widths = track_sequence(maps, video.fps(), config);
  } catch (const TrackingFailure& e) {
    timings["track"] = clock.lap_ms();
    report["status"] = "tracking-failure";
    report["error"] = e.what();
    report["tracking"] = {{"gap_frames", e.gap_frames()},
                          {"total_frames", e.total_frames()},
                          {"gap_fraction", e.gap_fraction()},
                          {"max_gap_fraction", e.max_fraction()}};
    report["timings_ms"] = timings;
    write_report(dir / "report.json", report);
    err << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  timings["track"] = clock.lap_ms();
  const auto analysis = analyze_widths(widths, config);
  timings["heart_rate"] = clock.lap_ms();

  json outputs;
  auto put = [&](const std::string& key, const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    outputs[key] = (dir / name).string();
  };
  put("widths_csv", "widths.csv", width_series_csv(widths));
  put("stage_raw_csv", "stage_raw.csv", stage_csv(analysis.raw));
  put("stage_smoothed_csv", "stage_smoothed.csv", stage_csv(analysis.smoothed));
  put("stage_sg_csv", "stage_sg.csv", stage_csv(analysis.sg));
  put("stage_derivative_csv", "stage_derivative.csv", stage_csv(analysis.derivative));
  put("peaks_csv", "peaks.csv", peaks_csv(analysis.result));
  const std::string summary = summary_line(analysis.result);
  put("summary", "summary.txt", summary + "\n");
  const TrendSeries& traced = config.peak_series == PeakSeries::Derivative ? analysis.derivative : analysis.sg;
  put("trend_svg", "trend.svg", trend_svg(traced, analysis.result));
  if (o.save_maps) write_maps(dir / "maps", maps, outputs);
  outputs["effective_config"] = (dir / "effective.cfg").string();
  outputs["report"] = (dir / "report.json").string();
  timings["write"] = clock.lap_ms();

  report["outputs"] = outputs;
  report["tracking"] = {{"reference_column", widths.reference.column},
                        {"reference_row", widths.reference.center_row},
                        {"reference_width", widths.reference.width},
                        {"gap_frames", widths.gap_count()},
                        {"total_frames", widths.frames_total}};
  report["heart_rate"] = {{"peak_count", analysis.result.peak_count},
                          {"duration_s", analysis.result.duration_s},
                          {"bpm", analysis.result.bpm},
                          {"min_prominence", analysis.min_prominence},
                          {"periodicity", analysis.periodicity.concentration},
                          {"dominant_hz", analysis.periodicity.frequency_hz},
                          {"ungated_peak_count", analysis.ungated_peak_count},
                          {"peak_times_s", analysis.result.peak_times}};
  report["warnings"] = analysis.warnings;
  report["timings_ms"] = timings;
  write_report(dir / "report.json", report);

  out << summary << "\n";
  for (const auto& w : analysis.warnings) err << "warning: " << w << "\n";
  return kExitOk;
}

std::string truth_csv(const GroundTruth& truth) {
  std::ostringstream os;
  os.precision(10);
  const int vessels = static_cast<int>(truth.spec().vessels.size());
  os << "frame_index,time_s,offset_x";
  for (int v = 0; v < vessels; ++v) os << ",width_" << v << ",drawn_width_" << v;
  os << '\n';
  for (int f = 0; f < truth.frame_count(); ++f) {
    os << f << ',' << truth.time_s(f) << ',' << truth.offset_x(f);
    for (int v = 0; v < vessels; ++v) os << ',' << truth.width(f, v) << ',' << truth.drawn_width(f, v);
    os << '\n';
  }
  return os.str();
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  std::string text;
  if (!o.phantom.empty()) text += "preset = " + o.phantom + "\n";
  if (!o.spec.empty()) text += read_text(o.spec) + "\n";
  for (const auto& s : o.sets) {
    const auto [key, value] = split_assignment(s);
    text += key + " = " + value + "\n";
  }
  PhantomSpec spec = parse_phantom_spec(text);
  if (o.seed) spec.seed = *o.seed;
  spec.validate();

  Stopwatch clock;
  const Phantom phantom = render_phantom(spec);
  const double render_ms = clock.lap_ms();

  const fs::path dir(o.out);
  const fs::path frames = dir / "frames";
  fs::create_directories(frames);
  for (std::size_t i = 0; i < phantom.video.size(); ++i) {
    write_frame_pgm(frames / frame_name("frame", i), phantom.video[i]);
  }
  json outputs{{"frames_dir", frames.string()}};
  write_text(dir / "truth.csv", truth_csv(phantom.truth));
  outputs["truth_csv"] = (dir / "truth.csv").string();
  json centerlines = json::array();
  for (std::size_t v = 0; v < spec.vessels.size(); ++v) {
    const auto path = dir / ("centerline_" + std::to_string(v) + ".pgm");
    write_binary_pgm(path, phantom.truth.centerline_mask(0, static_cast<int>(v)));
    centerlines.push_back(path.string());
  }
  outputs["centerline_masks"] = centerlines;
  write_binary_pgm(dir / "finger_mask.pgm", phantom.truth.finger_mask());
  outputs["finger_mask"] = (dir / "finger_mask.pgm").string();
  write_text(dir / "phantom.cfg", phantom_spec_to_text(spec));
  outputs["spec"] = (dir / "phantom.cfg").string();
  outputs["report"] = (dir / "report.json").string();

  json report{{"command", "synth"},
              {"status", "ok"},
              {"spec", phantom_spec_to_text(spec)},
              {"frame_count", phantom.video.size()},
              {"fps", spec.fps},
              {"outputs", outputs},
              {"timings_ms", {{"render", render_ms}, {"write", clock.lap_ms()}}}};
  write_report(dir / "report.json", report);
  out << "frames=" << phantom.video.size() << " fps=" << spec.fps << " vessels=" << spec.vessels.size()
      << " dir=" << frames.string() << "\n";
  return kExitOk;
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--frames", o.frames, "Directory of PGM/PNG frames")->required();
  cmd->add_option("--fps", o.fps, "Frame rate")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--pattern", o.pattern, "Glob selecting frame files")->capture_default_str();
  cmd->add_option("--method", o.method, "Extraction method")->check(CLI::IsMember({"maxcurv", "rlt"}));
  cmd->add_option("--preset", o.preset, "Post-processing preset")
      ->check(CLI::IsMember({"paper-mc", "paper-rlt", "paper-rlt-median-last", "none"}));
  cmd->add_option("--seed", o.seed, "Line-tracking seed");
  cmd->add_option("--out", o.out, "Output directory")->required();
  cmd->add_option("--config", o.config, "key = value config file");
  cmd->add_option("--set", o.sets, "Config override key=value (repeatable)");
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyMap:
    case ErrorKind::NoVessel:
    case ErrorKind::TrackingFailure:
      return kExitPipeline;
    default:
      return kExitInput;
  }
}

}  // namespace

std::string trend_svg(const TrendSeries& series, const HeartRateResult& result) {
  constexpr double kW = 960.0;
  constexpr double kH = 320.0;
  constexpr double kLeft = 60.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 30.0;
  constexpr double kBottom = 40.0;
  const auto n = series.values.size();
  double lo = 0.0;
  double hi = 0.0;
  for (double v : series.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double span_s = n > 1 ? static_cast<double>(n - 1) / series.fps : 1.0;
  auto px = [&](double t) { return kLeft + t / span_s * (kW - kLeft - kRight); };
  auto py = [&](double v) { return kTop + (hi - v) / (hi - lo) * (kH - kTop - kBottom); };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
     << kW << ' ' << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" << to_string(series.stage)
     << " trend, " << result.peak_count << " peaks, " << std::setprecision(1) << result.bpm << " bpm</text>\n"
     << std::setprecision(2);
  os << "<line x1=\"" << kLeft << "\" y1=\"" << py(0.0) << "\" x2=\"" << kW - kRight << "\" y2=\"" << py(0.0)
     << "\" stroke=\"#bbb\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"" << kH - 10 << "\" font-family=\"sans-serif\" font-size=\"11\">0 s</text>\n";
  os << "<text x=\"" << kW - kRight - 50 << "\" y=\"" << kH - 10
     << "\" font-family=\"sans-serif\" font-size=\"11\">" << span_s << " s</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < n; ++i) {
    os << px(static_cast<double>(i) / series.fps) << ',' << py(series.values[i]) << (i + 1 < n ? " " : "");
  }
  os << "\"/>\n";
  for (int idx : result.peak_indices) {
    const auto i = static_cast<std::size_t>(idx);
    os << "<circle class=\"peak\" cx=\"" << px(static_cast<double>(i) / series.fps) << "\" cy=\""
       << py(series.values[i]) << "\" r=\"3\" fill=\"#c0392b\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vein-width heart-rate pipeline"};
  app.require_subcommand(1);

  RunOptions extract_opts;
  auto* extract = app.add_subcommand("extract", "Per-frame vein maps");
  add_run_options(extract, extract_opts);

  RunOptions monitor_opts;
  auto* mon = app.add_subcommand("monitor", "Vein maps, width tracking and heart rate");
  add_run_options(mon, monitor_opts);
  mon->add_flag("--save-maps", monitor_opts.save_maps, "Also write the per-frame maps");

  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Render a phantom frame sequence with ground truth");
  synth->add_option("--spec", synth_opts.spec, "Phantom key = value file");
  synth->add_option("--phantom", synth_opts.phantom, "Named phantom preset");
  synth->add_option("--seed", synth_opts.seed, "Noise and jitter seed");
  synth->add_option("--set", synth_opts.sets, "Phantom override key=value (repeatable)");
  synth->add_option("--out", synth_opts.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*extract) return cmd_extract(extract_opts, out);
    if (*mon) return cmd_monitor(monitor_opts, out, err);
    return cmd_synth(synth_opts, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace veinpulse::cli
