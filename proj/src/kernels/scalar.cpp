#include "mmar/kernels.hpp"

namespace mmar::kernels::scalar {

void weighted_gram(const double* z, std::size_t d, std::size_t n, const double* w, double* g) {
  for (std::size_t t = 0; t < n; ++t) {
    const double* zt = z + t * d;
    const double wt = w[t];
    if (wt == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      const double a = wt * zt[j];
      double* gj = g + j * d;
      for (std::size_t i = 0; i <= j; ++i) gj[i] += a * zt[i];
    }
  }
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = j + 1; i < d; ++i) g[i + j * d] = g[j + i * d];
}

void column_sq_norms(const double* x, std::size_t rows, std::size_t n, double* out) {
  for (std::size_t t = 0; t < n; ++t) {
    const double* xt = x + t * rows;
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += xt[i] * xt[i];
    out[t] = s;
  }
}

}  // namespace mmar::kernels::scalar
