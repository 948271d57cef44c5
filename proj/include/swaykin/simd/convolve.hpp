#pragma once

#include <span>
#include <string_view>

namespace swaykin::simd {

enum class SimdLevel { Scalar, Avx2, Neon };

std::string_view to_string(SimdLevel level);

/// Best level supported by both this build and the running CPU.
SimdLevel best_level();
bool is_available(SimdLevel level);

/// Square-kernel correlation over the valid interior:
///   out(x, y) = sum_{i,j} kernel(i, j) * in(x + i - r, y + j - r),  r = ksize / 2
/// for r <= x < width - r, r <= y < height - r. Pixels in the border band are
/// set to 0. `in` and `out` are row-major width x height and must not alias.
void correlate2d(std::span<const double> in, int width, int height, std::span<const double> kernel, int ksize,
                 std::span<double> out, SimdLevel level);

namespace detail {

// Row kernels: compute out_row[x] for x in [r, width - r) of one output row.
// `in_rows` points at the first input row touched (y - r).
void correlate_row_scalar(const double* in_rows, int width, const double* kernel, int ksize, double* out_row);
void correlate_row_avx2(const double* in_rows, int width, const double* kernel, int ksize, double* out_row);
void correlate_row_neon(const double* in_rows, int width, const double* kernel, int ksize, double* out_row);

}  // namespace detail

}  // namespace swaykin::simd
