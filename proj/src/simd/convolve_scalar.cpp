#include "swaykin/simd/convolve.hpp"

namespace swaykin::simd::detail {

void correlate_row_scalar(const double* in_rows, int width, const double* kernel, int ksize, double* out_row) {
  const int r = ksize / 2;
  for (int x = r; x < width - r; ++x) {
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
