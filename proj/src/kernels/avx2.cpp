#include <immintrin.h>

#include "mmar/kernels.hpp"

namespace mmar::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void weighted_gram(const double* z, std::size_t d, std::size_t n, const double* w, double* g) {
  for (std::size_t t = 0; t < n; ++t) {
    const double* zt = z + t * d;
    const double wt = w[t];
    if (wt == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      const double a = wt * zt[j];
      const __m256d av = _mm256_set1_pd(a);
      double* gj = g + j * d;
      const std::size_t len = j + 1;
      std::size_t i = 0;
      for (; i + 4 <= len; i += 4) {
        const __m256d gv = _mm256_loadu_pd(gj + i);
        _mm256_storeu_pd(gj + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(zt + i), gv));
      }
      for (; i < len; ++i) gj[i] += a * zt[i];
    }
  }
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = j + 1; i < d; ++i) g[i + j * d] = g[j + i * d];
}

void column_sq_norms(const double* x, std::size_t rows, std::size_t n, double* out) {
  for (std::size_t t = 0; t < n; ++t) {
    const double* xt = x + t * rows;
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= rows; i += 4) {
      const __m256d v = _mm256_loadu_pd(xt + i);
      acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < rows; ++i) s += xt[i] * xt[i];
    out[t] = s;
  }
}

}  // namespace mmar::kernels::avx2
