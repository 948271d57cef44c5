#include <algorithm>
#include <cstddef>

#include "swaykin/error.hpp"
#include "swaykin/simd/convolve.hpp"

namespace swaykin::simd {

std::string_view to_string(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar: return "scalar";
    case SimdLevel::Avx2: return "avx2";
    case SimdLevel::Neon: return "neon";
  }
  return "unknown";
}

bool is_available(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar: return true;
    case SimdLevel::Avx2:
#if defined(SWAYKIN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case SimdLevel::Neon:
#if defined(SWAYKIN_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

SimdLevel best_level() {
  static const SimdLevel level = [] {
    if (is_available(SimdLevel::Avx2)) return SimdLevel::Avx2;
    if (is_available(SimdLevel::Neon)) return SimdLevel::Neon;
    return SimdLevel::Scalar;
  }();
  return level;
}

void correlate2d(std::span<const double> in, int width, int height, std::span<const double> kernel, int ksize,
                 std::span<double> out, SimdLevel level) {
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (ksize <= 0 || ksize % 2 == 0 || kernel.size() != static_cast<std::size_t>(ksize) * ksize) {
    throw Error(ErrorCode::InvalidInput, "kernel must be square with odd size");
  }
  if (in.size() != n || out.size() != n) throw Error(ErrorCode::InvalidInput, "buffer size mismatch");
  if (width < ksize || height < ksize) throw Error(ErrorCode::InvalidInput, "image smaller than kernel");
  if (!is_available(level)) throw Error(ErrorCode::InvalidInput, "requested SIMD level is not available");

  auto row_fn = &detail::correlate_row_scalar;
#if defined(SWAYKIN_HAVE_AVX2)
  if (level == SimdLevel::Avx2) row_fn = &detail::correlate_row_avx2;
#endif
#if defined(SWAYKIN_HAVE_NEON)
  if (level == SimdLevel::Neon) row_fn = &detail::correlate_row_neon;
#endif

  const int r = ksize / 2;
  std::fill(out.begin(), out.end(), 0.0);
  for (int y = r; y < height - r; ++y) {
    double* out_row = out.data() + static_cast<std::size_t>(y) * width;
    row_fn(in.data() + static_cast<std::size_t>(y - r) * width, width, kernel.data(), ksize, out_row);
    std::fill(out_row + width - r, out_row + width, 0.0);
    std::fill(out_row, out_row + r, 0.0);
  }
}

}  // namespace swaykin::simd
