#include "veinpulse/ingest.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>

#include "veinpulse/image_io.hpp"
#include "veinpulse/parallel.hpp"

namespace veinpulse {

std::vector<std::filesystem::path> list_frames(const SequenceManifest& manifest) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(manifest.directory, ec)) {
    throw Error(ErrorKind::NotFound, "frames directory not found: " + manifest.directory.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(manifest.directory)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (::fnmatch(manifest.pattern.c_str(), name.c_str(), 0) == 0) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

VideoSequence load_sequence(const SequenceManifest& manifest) {
  if (!(manifest.fps > 0.0) || !std::isfinite(manifest.fps)) {
    throw Error(ErrorKind::Parameter, "fps must be positive");
  }
  const auto files = list_frames(manifest);
  if (files.empty()) {
    throw Error(ErrorKind::NotFound, "no frames matching '" + manifest.pattern + "' in " +
                                         manifest.directory.string());
  }
  std::vector<Gray8Image> raw(files.size());
  parallel_for(static_cast<int>(files.size()),
               [&](int i) { raw[static_cast<std::size_t>(i)] = read_gray_image(files[static_cast<std::size_t>(i)]); });

  std::vector<Frame> frames;
  frames.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].width != raw.front().width || raw[i].height != raw.front().height) {
      throw Error(ErrorKind::Dimension,
                  "frame " + files[i].filename().string() + " is " + std::to_string(raw[i].width) +
                      "x" + std::to_string(raw[i].height) + ", expected " +
                      std::to_string(raw.front().width) + "x" + std::to_string(raw.front().height));
    }
    frames.push_back(normalize_frame(raw[i].width, raw[i].height, raw[i].pixels));
  }
  return VideoSequence(std::move(frames), manifest.fps);
}

}  // namespace veinpulse
