#include <immintrin.h>

#include "swaykin/simd/convolve.hpp"

namespace swaykin::simd::detail {

// Sixteen output pixels per pass in four independent accumulators so the
// fused multiply-adds pipeline; each tap is broadcast once. Leftover groups
// of four and the scalar tail follow.
void correlate_row_avx2(const double* in_rows, int width, const double* kernel, int ksize, double* out_row) {
  const int r = ksize / 2;
  const int x_end = width - r;
  int x = r;
  for (; x + 16 <= x_end; x += 16) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    for (int i = 0; i < ksize; ++i) {
      const double* src = in_rows + static_cast<long>(i) * width + (x - r);
      const double* k = kernel + i * ksize;
      for (int j = 0; j < ksize; ++j) {
        const __m256d kv = _mm256_broadcast_sd(k + j);
        acc0 = _mm256_fmadd_pd(kv, _mm256_loadu_pd(src + j), acc0);
        acc1 = _mm256_fmadd_pd(kv, _mm256_loadu_pd(src + j + 4), acc1);
        acc2 = _mm256_fmadd_pd(kv, _mm256_loadu_pd(src + j + 8), acc2);
        acc3 = _mm256_fmadd_pd(kv, _mm256_loadu_pd(src + j + 12), acc3);
      }
    }
    _mm256_storeu_pd(out_row + x, acc0);
    _mm256_storeu_pd(out_row + x + 4, acc1);
    _mm256_storeu_pd(out_row + x + 8, acc2);
    _mm256_storeu_pd(out_row + x + 12, acc3);
  }
  for (; x + 4 <= x_end; x += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (int i = 0; i < ksize; ++i) {
      const double* src = in_rows + static_cast<long>(i) * width + (x - r);
      const double* k = kernel + i * ksize;
      for (int j = 0; j < ksize; ++j) {
        acc = _mm256_fmadd_pd(_mm256_broadcast_sd(k + j), _mm256_loadu_pd(src + j), acc);
      }
    }
    _mm256_storeu_pd(out_row + x, acc);
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
