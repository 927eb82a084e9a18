#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "veinpulse/core.hpp"

namespace veinpulse {

/// Where a frame sequence lives on disk. Frames are taken in lexicographic
/// filename order, so indices in names must be zero-padded.
struct SequenceManifest {
  std::filesystem::path directory;
  std::string pattern = "*.pgm";
  double fps = 0.0;
};

/// Sorted list of files in the manifest directory whose names match the glob.
std::vector<std::filesystem::path> list_frames(const SequenceManifest& manifest);

VideoSequence load_sequence(const SequenceManifest& manifest);

}  // namespace veinpulse
