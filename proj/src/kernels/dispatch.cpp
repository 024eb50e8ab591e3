#include <atomic>
#include <string>

#include "mmar/error.hpp"
#include "mmar/kernels.hpp"

namespace mmar::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(MMAR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{best_available()};
  return slot;
}

}  // namespace

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

Isa best_available() { return supported(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active() { return active_slot().load(std::memory_order_relaxed); }

void set_active(Isa isa) {
  if (!supported(isa))
    throw InvalidParameter("kernel variant '" + std::string(name(isa)) + "' is not supported here");
  active_slot().store(isa, std::memory_order_relaxed);
}

void weighted_gram(const double* z, std::size_t d, std::size_t n, const double* w, double* g) {
#if defined(MMAR_HAVE_AVX2)
  if (active() == Isa::avx2) return avx2::weighted_gram(z, d, n, w, g);
#endif
  scalar::weighted_gram(z, d, n, w, g);
}

void column_sq_norms(const double* x, std::size_t rows, std::size_t n, double* out) {
#if defined(MMAR_HAVE_AVX2)
  if (active() == Isa::avx2) return avx2::column_sq_norms(x, rows, n, out);
#endif
  scalar::column_sq_norms(x, rows, n, out);
}

}  // namespace mmar::kernels
