#pragma once

#include <iosfwd>
#include <string>

#include "veinpulse/hr.hpp"

namespace veinpulse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitPipeline = 3;

/// Entry point shared by the executable and the tests. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Derivative trace with a marker on every counted peak.
std::string trend_svg(const TrendSeries& series, const HeartRateResult& result);

}  // namespace veinpulse::cli
