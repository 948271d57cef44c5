#include <arm_neon.h>

#include "swaykin/simd/convolve.hpp"

namespace swaykin::simd::detail {

void correlate_row_neon(const double* in_rows, int width, const double* kernel, int ksize, double* out_row) {
  const int r = ksize / 2;
  const int x_end = width - r;
  int x = r;
  for (; x + 2 <= x_end; x += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (int i = 0; i < ksize; ++i) {
      const double* src = in_rows + static_cast<long>(i) * width + (x - r);
      const double* k = kernel + i * ksize;
      for (int j = 0; j < ksize; ++j) acc = vfmaq_n_f64(acc, vld1q_f64(src + j), k[j]);
    }
    vst1q_f64(out_row + x, acc);
  }
  for (; x < x_end; ++x) {
    double acc = 0.0;
    for (int i = 0; i < ksize; ++i) {
      const double* src = in_rows + static_cast<long>(i) * width + (x - r);
      const double* k = kernel + i * ksize;
      for (int j = 0; j < ksize; ++j) acc += k[j] * src[j];
    }
    out_row[x] = acc;
  }
}

}  // namespace swaykin::simd::detail
