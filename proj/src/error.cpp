#include "swaykin/error.hpp"

namespace swaykin {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::BehindCamera: return "behind-camera";
    case ErrorCode::DistortionInversion: return "distortion-inversion";
    case ErrorCode::Degenerate: return "degenerate";
    case ErrorCode::IllConditioned: return "ill-conditioned";
    case ErrorCode::NoGradient: return "no-gradient";
    case ErrorCode::InsufficientCorrespondence: return "insufficient-correspondence";
    case ErrorCode::AmbiguousTarget: return "ambiguous-target";
    case ErrorCode::Gimbal: return "gimbal";
    case ErrorCode::NonFinite: return "non-finite";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace swaykin
