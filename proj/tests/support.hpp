#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "veinpulse/core.hpp"
#include "veinpulse/synth.hpp"
#include "veinpulse/veinmap.hpp"

namespace vp_test {

using namespace veinpulse;

/// Fresh scratch directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("veinpulse_" + name + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline PhantomSpec short_phantom(const std::string& preset = "default", double seconds = 2.0) {
  PhantomSpec spec = phantom_preset(preset);
  spec.duration_s = seconds;
  return spec;
}

inline BinaryGrid and_not(const BinaryGrid& a, const BinaryGrid& b) {
  BinaryGrid out(a.width(), a.height(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] && !b.data()[i];
  return out;
}

inline std::size_t count(const BinaryGrid& g) {
  std::size_t n = 0;
  for (auto v : g.data()) n += v ? 1 : 0;
  return n;
}

/// Share of `truth` pixels also set in `map`.
inline double recall(const BinaryGrid& map, const BinaryGrid& truth) {
  std::size_t hit = 0;
  std::size_t all = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!truth.data()[i]) continue;
    ++all;
    hit += map.data()[i] ? 1 : 0;
  }
  return all == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(all);
}

/// Foreground share among finger pixels that are not within `margin` px of a
/// vessel.
inline double false_positive_rate(const BinaryGrid& map, const GroundTruth& truth, int frame, double margin = 2.0) {
  const auto finger = truth.finger_mask();
  const auto vessel = truth.vessel_mask(frame, margin);
  std::size_t fp = 0;
  std::size_t all = 0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!finger.data()[i] || vessel.data()[i]) continue;
    ++all;
    fp += map.data()[i] ? 1 : 0;
  }
  return all == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(all);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double jaccard(const BinaryGrid& a, const BinaryGrid& b) {
  std::size_t both = 0;
  std::size_t either = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    both += (a.data()[i] && b.data()[i]) ? 1 : 0;
    either += (a.data()[i] || b.data()[i]) ? 1 : 0;
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

inline VeinMap map_from_rows(int width, int height, const std::vector<std::string>& rows) {
  VeinMap m{BinaryGrid(width, height, 0)};
  for (int y = 0; y < static_cast<int>(rows.size()); ++y) {
    for (int x = 0; x < static_cast<int>(rows[static_cast<std::size_t>(y)].size()); ++x) {
      m.vein.at(x, y) = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] == '#' ? 1 : 0;
    }
  }
  return m;
}

inline VeinMap random_map(int width, int height, double density, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::bernoulli_distribution on(density);
  VeinMap m{BinaryGrid(width, height, 0)};
  for (auto& v : m.vein.data()) v = on(rng) ? 1 : 0;
  return m;
}

}  // namespace vp_test
