#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swaykin {

enum class ErrorCode {
  InvalidInput,
  BehindCamera,
  DistortionInversion,
  Degenerate,
  IllConditioned,
  NoGradient,
  InsufficientCorrespondence,
  AmbiguousTarget,
  Gimbal,
  NonFinite,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library is reported as an Error carrying a code, so
// callers (the CLI in particular) can map failures to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace swaykin
