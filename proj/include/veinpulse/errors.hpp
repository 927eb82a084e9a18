#pragma once

#include <stdexcept>
#include <string>

namespace veinpulse {

enum class ErrorKind {
  Dimension,
  NotFound,
  Format,
  Parameter,
  EmptyMap,
  NoVessel,
  TrackingFailure,
  Spec,
  Io,
};

const char* to_string(ErrorKind kind);

/// Base error for every failure the library reports. The kind drives the CLI
/// exit code mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when too many frames could not be matched to the monitored vessel.
class TrackingFailure : public Error {
 public:
  TrackingFailure(int gap_frames, int total_frames, double max_fraction);

  int gap_frames() const noexcept { return gap_frames_; }
  int total_frames() const noexcept { return total_frames_; }
  double max_fraction() const noexcept { return max_fraction_; }
  double gap_fraction() const noexcept {
    return total_frames_ > 0 ? static_cast<double>(gap_frames_) / total_frames_ : 0.0;
  }

 private:
  int gap_frames_;
  int total_frames_;
  double max_fraction_;
};

}  // namespace veinpulse
