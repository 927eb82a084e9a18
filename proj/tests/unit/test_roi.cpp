#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "../support.hpp"
#include "veinpulse/roi.hpp"
#include "veinpulse/synth.hpp"

using namespace veinpulse;

namespace {

Frame banded(int w, int h, int top, int bottom, double dark, double bright) {
  std::vector<double> px(static_cast<std::size_t>(w * h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) px[static_cast<std::size_t>(y * w + x)] = (y >= top && y <= bottom) ? bright : dark;
  }
  return Frame(w, h, std::move(px));
}

double row_mean(const Frame& f, int x, int a, int b) {
  double s = 0.0;
  for (int y = a; y < b; ++y) s += f.at(x, std::clamp(y, 0, f.height() - 1));
  return s / (b - a);
}

// Direct evaluation of both step responses at every candidate row.
std::pair<std::vector<double>, std::vector<double>> responses(const Frame& f, int x, int k) {
  const int h = f.height();
  std::vector<double> up(static_cast<std::size_t>(h), -1e300);
  std::vector<double> down(static_cast<std::size_t>(h), -1e300);
  for (int r = 0; r < h / 2; ++r) up[static_cast<std::size_t>(r)] = row_mean(f, x, r, r + k) - row_mean(f, x, r - k, r);
  for (int r = h / 2; r < h; ++r) {
    down[static_cast<std::size_t>(r)] = row_mean(f, x, r - k + 1, r + 1) - row_mean(f, x, r + 1, r + k + 1);
  }
  return {up, down};
}

void check_well_formed(const FingerMask& m) {
  for (int x = 0; x < m.width(); ++x) {
    const int u = m.upper_boundary[static_cast<std::size_t>(x)];
    const int l = m.lower_boundary[static_cast<std::size_t>(x)];
    REQUIRE(u <= l);
    for (int y = 0; y < m.height(); ++y) CHECK(m.contains(x, y) == (y >= u && y <= l));
  }
}

}  // namespace

TEST_CASE("bright band between dark rows gives boundaries 10 and 29") {
  const auto f = banded(16, 40, 10, 29, 0.05, 0.9);
  const auto m = localize_finger(f, 4);
  CHECK(m.width() == 16);
  CHECK(m.height() == 40);
  for (int x = 0; x < 16; ++x) {
    CHECK(std::abs(m.upper_boundary[static_cast<std::size_t>(x)] - 10) <= 1);
    CHECK(std::abs(m.lower_boundary[static_cast<std::size_t>(x)] - 29) <= 1);
  }
  check_well_formed(m);
}

TEST_CASE("boundaries are the argmax of the brute-force step response") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int w = 9;
    const int h = 30 + trial;
    std::vector<double> px(static_cast<std::size_t>(w * h));
    for (auto& v : px) v = u(rng);
    const Frame f(w, h, px);
    const int k = 1 + trial % 4;
    const auto m = localize_finger(f, k);
    for (int x = 0; x < w; ++x) {
      const auto [up, down] = responses(f, x, k);
      const double up_max = *std::max_element(up.begin(), up.end());
      const double down_max = *std::max_element(down.begin(), down.end());
      CHECK(up[static_cast<std::size_t>(m.upper_boundary[static_cast<std::size_t>(x)])] ==
            doctest::Approx(up_max).epsilon(1e-12));
      CHECK(down[static_cast<std::size_t>(m.lower_boundary[static_cast<std::size_t>(x)])] ==
            doctest::Approx(down_max).epsilon(1e-12));
    }
    check_well_formed(m);
  }
}

TEST_CASE("uniform frame breaks ties toward the vertical center") {
  const auto f = banded(5, 40, 0, 39, 0.5, 0.5);
  const auto m = localize_finger(f, 4);
  for (int x = 0; x < 5; ++x) {
    CHECK(m.upper_boundary[static_cast<std::size_t>(x)] == 19);
    CHECK(m.lower_boundary[static_cast<std::size_t>(x)] == 20);
  }
  check_well_formed(m);
}

TEST_CASE("vertical translation moves both boundaries by the same amount") {
  auto spec = vp_test::short_phantom("default", 0.1);
  spec.noise_sigma = 0.0;
  const auto frame = render_phantom(spec).video[0];
  const auto base = localize_finger(frame, 4);
  for (int shift : {1, 3, 7}) {
    std::vector<double> px(frame.pixels().size());
    for (int y = 0; y < frame.height(); ++y) {
      for (int x = 0; x < frame.width(); ++x) {
        px[static_cast<std::size_t>(y * frame.width() + x)] = frame.at(x, std::max(0, y - shift));
      }
    }
    const auto moved = localize_finger(Frame(frame.width(), frame.height(), px), 4);
    for (int x = 0; x < frame.width(); ++x) {
      CHECK(moved.upper_boundary[static_cast<std::size_t>(x)] == base.upper_boundary[static_cast<std::size_t>(x)] + shift);
      CHECK(moved.lower_boundary[static_cast<std::size_t>(x)] == base.lower_boundary[static_cast<std::size_t>(x)] + shift);
    }
  }
}

TEST_CASE("phantom finger is covered by the mask") {
  const auto ph = render_phantom(vp_test::short_phantom("default", 0.2));
  const auto finger = ph.truth.finger_mask();
  for (std::size_t i = 0; i < ph.video.size(); ++i) {
    const auto m = localize_finger(ph.video[i], 4);
    CHECK(vp_test::recall(m.inside, finger) >= 0.99);
  }
}

TEST_CASE("frames too short for the detector are a dimension error") {
  const auto f = banded(4, 8, 2, 5, 0.0, 1.0);
  CHECK_THROWS_AS(localize_finger(f, 4), Error);
  CHECK_NOTHROW(localize_finger(f, 3));
}

TEST_CASE("usable columns need a long enough inside run") {
  FingerMask m = full_mask(3, 20);
  m.upper_boundary = {0, 5, 10};
  m.lower_boundary = {19, 14, 12};
  CHECK(usable_columns(m, 10) == std::vector<bool>{true, true, false});
}
