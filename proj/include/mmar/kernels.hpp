#pragma once

// Data-parallel inner loops of the estimator. Each kernel has a portable
// scalar reference implementation and, on x86-64, an AVX2/FMA variant. The
// variant is chosen once at startup from CPUID and can be overridden (tests
// use this to check the variants against each other).

#include <cstddef>
#include <string_view>

namespace mmar::kernels {

enum class Isa { scalar, avx2 };

std::string_view name(Isa isa);
bool supported(Isa isa);
// Best variant this binary and CPU support.
Isa best_available();
Isa active();
// Throws mmar::InvalidParameter when the variant is not supported.
void set_active(Isa isa);

// g (d x d, column-major) += sum_t w[t] z_t z_t^T with z_t the t-th column
// of the column-major d x n matrix z. g is symmetric on return.
void weighted_gram(const double* z, std::size_t d, std::size_t n, const double* w, double* g);

// out[t] = sum_i x(i,t)^2 for the column-major rows x n matrix x.
void column_sq_norms(const double* x, std::size_t rows, std::size_t n, double* out);

namespace scalar {
void weighted_gram(const double* z, std::size_t d, std::size_t n, const double* w, double* g);
void column_sq_norms(const double* x, std::size_t rows, std::size_t n, double* out);
}  // namespace scalar

#if defined(MMAR_HAVE_AVX2)
namespace avx2 {
void weighted_gram(const double* z, std::size_t d, std::size_t n, const double* w, double* g);
void column_sq_norms(const double* x, std::size_t rows, std::size_t n, double* out);
}  // namespace avx2
#endif

}  // namespace mmar::kernels
