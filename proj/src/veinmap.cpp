#include "veinpulse/veinmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "veinpulse/random.hpp"

namespace veinpulse {

std::size_t VeinMap::count() const {
  return static_cast<std::size_t>(std::count_if(vein.data().begin(), vein.data().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

namespace {

struct Kernels {
  int radius = 0;
  std::vector<double> smooth;  // g
  std::vector<double> first;   // exact on linear profiles
  std::vector<double> second;  // exact on quadratic profiles
};

Kernels make_kernels(double sigma) {
  Kernels k;
  k.radius = static_cast<int>(std::ceil(4.0 * sigma));
  const int n = 2 * k.radius + 1;
  k.smooth.resize(static_cast<std::size_t>(n));
  k.first.resize(static_cast<std::size_t>(n));
  k.second.resize(static_cast<std::size_t>(n));

  double sum = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    const double g = std::exp(-0.5 * i * i / (sigma * sigma));
    k.smooth[static_cast<std::size_t>(i + k.radius)] = g;
    sum += g;
  }
  for (auto& g : k.smooth) g /= sum;

  double m2 = 0.0;
  double m4 = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    const double g = k.smooth[static_cast<std::size_t>(i + k.radius)];
    m2 += i * i * g;
    m4 += static_cast<double>(i) * i * i * i * g;
  }
  // first(i) = i g(i) / m2 gives sum_i (x+i) first(i) = 1.
  // second(i) = (i^2 - m2) g(i) / (m4 - m2^2) sums to zero and gives
  // sum_i (x+i)^2 second(i) = 2.
  const double s2 = 2.0 / (m4 - m2 * m2);
  for (int i = -k.radius; i <= k.radius; ++i) {
    const auto idx = static_cast<std::size_t>(i + k.radius);
    const double g = k.smooth[idx];
    k.first[idx] = i * g / m2;
    k.second[idx] = (i * i - m2) * g * s2;
  }
  return k;
}

// Correlation along x with edge replication.
Grid<double> filter_x(const Grid<double>& in, const std::vector<double>& kernel, int radius) {
  Grid<double> out(in.width(), in.height());
  const int w = in.width();
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i + radius)] * in.at(std::clamp(x + i, 0, w - 1), y);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

Grid<double> filter_y(const Grid<double>& in, const std::vector<double>& kernel, int radius) {
  Grid<double> out(in.width(), in.height());
  const int h = in.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < in.width(); ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i + radius)] * in.at(x, std::clamp(y + i, 0, h - 1));
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

struct Direction {
  int dx;
  int dy;
};

// Vertical, horizontal, and the two diagonals.
constexpr std::array<Direction, 4> kProfileDirections{{{0, 1}, {1, 0}, {1, 1}, {1, -1}}};

// Scans one profile line and deposits scores into `plane`.
void score_profile(const std::vector<std::pair<int, int>>& line, const std::vector<double>& kappa,
                   double floor, Grid<double>& plane) {
  const int n = static_cast<int>(line.size());
  int i = 0;
  while (i < n) {
    if (!(kappa[static_cast<std::size_t>(i)] > 0.0)) {
      ++i;
      continue;
    }
    int end = i;
    while (end + 1 < n && kappa[static_cast<std::size_t>(end + 1)] > 0.0) ++end;
    const double run = static_cast<double>(end - i + 1);
    for (int j = i; j <= end; ++j) {
      const double k = kappa[static_cast<std::size_t>(j)];
      const bool rises = j == i || k > kappa[static_cast<std::size_t>(j - 1)];
      const bool falls = j == end || k >= kappa[static_cast<std::size_t>(j + 1)];
      if (rises && falls && k > floor) {
        const auto [x, y] = line[static_cast<std::size_t>(j)];
        plane.at(x, y) += k * run;
      }
    }
    i = end + 1;
  }
}

}  // namespace

double robust_sigma(std::vector<double> values) {
  if (values.empty()) return 0.0;
  auto median_of = [](std::vector<double>& v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
  };
  const double med = median_of(values);
  for (auto& v : values) v = std::abs(v - med);
  return 1.4826 * median_of(values);
}

Grid<double> curvature_scores(const Frame& frame, const FingerMask& mask,
                              const MaxCurvatureOptions& options) {
  if (!(options.sigma >= 1.0)) {
    throw Error(ErrorKind::Parameter, "curvature sigma must be >= 1");
  }
  if (mask.width() != frame.width() || mask.height() != frame.height()) {
    throw Error(ErrorKind::Dimension, "mask and frame dimensions differ");
  }
  const int w = frame.width();
  const int h = frame.height();
  const Kernels k = make_kernels(options.sigma);

  const Grid<double>& img = frame.grid();
  const Grid<double> sx = filter_x(img, k.smooth, k.radius);
  const Grid<double> d1x = filter_x(img, k.first, k.radius);
  const Grid<double> d2x = filter_x(img, k.second, k.radius);
  const Grid<double> fy = filter_y(sx, k.first, k.radius);
  const Grid<double> fyy = filter_y(sx, k.second, k.radius);
  const Grid<double> fx = filter_y(d1x, k.smooth, k.radius);
  const Grid<double> fxx = filter_y(d2x, k.smooth, k.radius);
  const Grid<double> fxy = filter_y(d1x, k.first, k.radius);

  const int directions = options.directions == CurvatureDirections::Four ? 4 : 1;
  Grid<double> total(w, h, 0.0);
  Grid<double> kgrid(w, h, 0.0);
  std::vector<double> inside;
  std::vector<std::pair<int, int>> line;
  std::vector<double> kappa;
  for (int d = 0; d < directions; ++d) {
    const auto dir = kProfileDirections[static_cast<std::size_t>(d)];
    inside.clear();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double p1 = 0.0;
        double p2 = 0.0;
        if (dir.dx == 0) {
          p1 = fy.at(x, y);
          p2 = fyy.at(x, y);
        } else if (dir.dy == 0) {
          p1 = fx.at(x, y);
          p2 = fxx.at(x, y);
        } else {
          const double s = static_cast<double>(dir.dy);
          p1 = (fx.at(x, y) + s * fy.at(x, y)) / std::sqrt(2.0);
          p2 = 0.5 * (fxx.at(x, y) + 2.0 * s * fxy.at(x, y) + fyy.at(x, y));
        }
        const double kv = p2 / std::pow(1.0 + p1 * p1, 1.5);
        kgrid.at(x, y) = kv;
        if (mask.contains(x, y)) inside.push_back(kv);
      }
    }
    const double floor = std::max(options.curvature_floor, options.noise_factor * robust_sigma(inside));

    Grid<double> plane(w, h, 0.0);
    for (int sy = 0; sy < h; ++sy) {
      for (int sx0 = 0; sx0 < w; ++sx0) {
        // A line starts at each pixel whose predecessor is off-frame.
        if (frame.grid().contains(sx0 - dir.dx, sy - dir.dy)) continue;
        line.clear();
        kappa.clear();
        for (int x = sx0, y = sy; frame.grid().contains(x, y); x += dir.dx, y += dir.dy) {
          line.emplace_back(x, y);
          kappa.push_back(mask.contains(x, y) ? kgrid.at(x, y) : 0.0);
        }
        score_profile(line, kappa, floor, plane);
      }
    }
    for (std::size_t i = 0; i < total.size(); ++i) total.data()[i] += plane.data()[i];
  }
  return total;
}

ScoreField max_curvature(const Frame& frame, const FingerMask& mask, const MaxCurvatureOptions& options) {
  const Grid<double> v = curvature_scores(frame, mask, options);
  const int w = v.width();
  const int h = v.height();
  auto value = [&](int x, int y) { return v.contains(x, y) ? v.at(x, y) : 0.0; };

  ScoreField field{Grid<double>(w, h, 0.0), ExtractionMethod::MaxCurvature};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.contains(x, y)) continue;
      double best = 0.0;
      for (const auto dir : kProfileDirections) {
        const double ahead = std::max(value(x + dir.dx, y + dir.dy), value(x + 2 * dir.dx, y + 2 * dir.dy));
        const double behind = std::max(value(x - dir.dx, y - dir.dy), value(x - 2 * dir.dx, y - 2 * dir.dy));
        // A side lying wholly outside the mask does not veto the other.
        const bool ahead_in = mask.contains(x + dir.dx, y + dir.dy) || mask.contains(x + 2 * dir.dx, y + 2 * dir.dy);
        const bool behind_in = mask.contains(x - dir.dx, y - dir.dy) || mask.contains(x - 2 * dir.dx, y - 2 * dir.dy);
        const double c = ahead_in && behind_in ? std::min(ahead, behind) : ahead_in ? ahead : behind_in ? behind : 0.0;
        best = std::max(best, c);
      }
      field.scores.at(x, y) = best;
    }
  }
  return field;
}

ScoreField max_curvature(const Frame& frame, const FingerMask& mask, double sigma) {
  return max_curvature(frame, mask, MaxCurvatureOptions{.sigma = sigma});
}

namespace {

constexpr std::array<Direction, 8> kHeadings{
    {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

double bilinear(const Frame& frame, double x, double y, bool& ok) {
  if (x < 0.0 || y < 0.0 || x > frame.width() - 1 || y > frame.height() - 1) {
    ok = false;
    return 0.0;
  }
  const int x0 = std::max(0, std::min(static_cast<int>(x), frame.width() - 2));
  const int y0 = std::max(0, std::min(static_cast<int>(y), frame.height() - 2));
  const int x1 = std::min(x0 + 1, frame.width() - 1);
  const int y1 = std::min(y0 + 1, frame.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = frame.at(x0, y0) * (1.0 - fx) + frame.at(x1, y0) * fx;
  const double bottom = frame.at(x0, y1) * (1.0 - fx) + frame.at(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

}  // namespace

ScoreField repeated_line_tracking(const Frame& frame, const FingerMask& mask,
                                  const LineTrackingOptions& options) {
  if (options.iterations < 0) throw Error(ErrorKind::Parameter, "iterations must be >= 0");
  if (!(options.valley_radius > 0.0)) throw Error(ErrorKind::Parameter, "valley radius must be > 0");
  if (mask.width() != frame.width() || mask.height() != frame.height()) {
    throw Error(ErrorKind::Dimension, "mask and frame dimensions differ");
  }
  const int w = frame.width();
  const int h = frame.height();

  std::vector<int> inside;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.contains(x, y)) inside.push_back(y * w + x);
    }
  }

  Grid<std::int64_t> locus(w, h, 0);
  if (inside.empty() || options.iterations == 0) {
    return ScoreField{Grid<double>(w, h, 0.0), ExtractionMethod::RepeatedLineTracking};
  }

  // Perpendicular unit offsets for each heading, scaled by the radius.
  std::array<std::pair<double, double>, 8> flank{};
  for (std::size_t i = 0; i < kHeadings.size(); ++i) {
    const double len = std::hypot(kHeadings[i].dx, kHeadings[i].dy);
    flank[i] = {-kHeadings[i].dy / len * options.valley_radius, kHeadings[i].dx / len * options.valley_radius};
  }

  Grid<int> stamp(w, h, -1);
  std::vector<int> path;
  for (int walk = 0; walk < options.iterations; ++walk) {
    SplitMix64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(walk)));
    const int start = inside[std::uniform_int_distribution<std::size_t>(0, inside.size() - 1)(rng)];
    int heading = std::uniform_int_distribution<int>(0, 7)(rng);
    int x = start % w;
    int y = start / w;

    path.clear();
    path.push_back(start);
    stamp.at(x, y) = walk;
    for (;;) {
      std::array<double, 3> weight{};
      std::array<int, 3> cand_heading{};
      double total = 0.0;
      for (int c = 0; c < 3; ++c) {
        const int hd = (heading + c - 1 + 8) % 8;
        cand_heading[static_cast<std::size_t>(c)] = hd;
        const int nx = x + kHeadings[static_cast<std::size_t>(hd)].dx;
        const int ny = y + kHeadings[static_cast<std::size_t>(hd)].dy;
        if (!mask.contains(nx, ny) || stamp.at(nx, ny) == walk) continue;
        bool ok = true;
        const auto [ox, oy] = flank[static_cast<std::size_t>(hd)];
        const double left = bilinear(frame, nx + ox, ny + oy, ok);
        const double right = bilinear(frame, nx - ox, ny - oy, ok);
        if (!ok) continue;
        const double depth = std::min(left, right) - frame.at(nx, ny);
        if (depth < options.valley_depth || depth <= 0.0) continue;
        const double wgt = depth * (c == 1 ? 2.0 : 1.0);
        weight[static_cast<std::size_t>(c)] = wgt;
        total += wgt;
      }
      if (total <= 0.0) break;
      double pick = std::uniform_real_distribution<double>(0.0, total)(rng);
      int chosen = 0;
      for (; chosen < 2; ++chosen) {
        if (weight[static_cast<std::size_t>(chosen)] > 0.0 && pick < weight[static_cast<std::size_t>(chosen)]) break;
        pick -= weight[static_cast<std::size_t>(chosen)];
      }
      while (weight[static_cast<std::size_t>(chosen)] <= 0.0) --chosen;
      heading = cand_heading[static_cast<std::size_t>(chosen)];
      x += kHeadings[static_cast<std::size_t>(heading)].dx;
      y += kHeadings[static_cast<std::size_t>(heading)].dy;
      stamp.at(x, y) = walk;
      path.push_back(y * w + x);
    }
    if (path.size() > 1) {
      for (int p : path) ++locus.data()[static_cast<std::size_t>(p)];
    }
  }

  ScoreField field{Grid<double>(w, h, 0.0), ExtractionMethod::RepeatedLineTracking};
  for (std::size_t i = 0; i < locus.size(); ++i) field.scores.data()[i] = static_cast<double>(locus.data()[i]);
  return field;
}

double nonzero_percentile(const ScoreField& field, double percentile) {
  if (!(percentile >= 0.0 && percentile < 100.0)) {
    throw Error(ErrorKind::Parameter, "percentile must be in [0,100)");
  }
  std::vector<double> nonzero;
  for (double v : field.scores.data()) {
    if (v > 0.0) nonzero.push_back(v);
  }
  if (nonzero.empty()) throw Error(ErrorKind::EmptyMap, "score field is all zero");
  std::sort(nonzero.begin(), nonzero.end());
  const double pos = percentile / 100.0 * static_cast<double>(nonzero.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, nonzero.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return nonzero[lo] + (nonzero[hi] - nonzero[lo]) * frac;
}

VeinMap binarize(const ScoreField& field, double percentile) {
  const double threshold = nonzero_percentile(field, percentile);
  VeinMap map{BinaryGrid(field.width(), field.height(), 0)};
  for (std::size_t i = 0; i < field.scores.size(); ++i) {
    const double v = field.scores.data()[i];
    map.vein.data()[i] = (v > 0.0 && v >= threshold) ? 1 : 0;
  }
  return map;
}

}  // namespace veinpulse
