#include <doctest.h>

#include <vector>

#include "mmar/error.hpp"
#include "mmar/kernels.hpp"
#include "mmar/rng.hpp"

using namespace mmar;

namespace {

std::vector<double> draws(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = std_normal(rng);
  return v;
}

}  // namespace

TEST_CASE("scalar is always available and selectable") {
  CHECK(kernels::supported(kernels::Isa::scalar));
  const auto before = kernels::active();
  kernels::set_active(kernels::Isa::scalar);
  CHECK(kernels::active() == kernels::Isa::scalar);
  kernels::set_active(before);
  CHECK(kernels::name(kernels::Isa::avx2) == "avx2");
}

TEST_CASE("weighted gram: scalar reference against a naive triple loop") {
  Rng rng(1);
  const std::size_t d = 7, n = 13;
  const auto z = draws(d * n, rng);
  auto w = draws(n, rng);
  for (auto& x : w) x = std::abs(x);
  std::vector<double> g(d * d, 0.0);
  kernels::scalar::weighted_gram(z.data(), d, n, w.data(), g.data());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < n; ++t) s += w[t] * z[i + d * t] * z[j + d * t];
      CHECK(g[i + d * j] == doctest::Approx(s).epsilon(1e-13));
    }
}

#if defined(MMAR_HAVE_AVX2)
TEST_CASE("avx2 variants match the scalar reference") {
  if (!kernels::supported(kernels::Isa::avx2)) {
    MESSAGE("CPU lacks AVX2/FMA; equivalence not exercised");
    return;
  }
  Rng rng(2);
  // Sizes cover full vectors, remainders and the single-row/column edge.
  for (std::size_t d : {1u, 2u, 3u, 4u, 5u, 8u, 13u, 31u}) {
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 257u}) {
      const auto z = draws(d * n, rng);
      auto w = draws(n, rng);
      for (auto& x : w) x = std::abs(x);
      std::vector<double> gs(d * d, 0.5), gv(d * d, 0.5);
      kernels::scalar::weighted_gram(z.data(), d, n, w.data(), gs.data());
      kernels::avx2::weighted_gram(z.data(), d, n, w.data(), gv.data());
      double scale = 0.0;
      for (double v : gs) scale = std::max(scale, std::abs(v));
      for (std::size_t i = 0; i < d * d; ++i) CHECK(std::abs(gs[i] - gv[i]) <= 1e-13 * (1.0 + scale));
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) CHECK(gv[i + d * j] == gv[j + d * i]);

      std::vector<double> ns(n), nv(n);
      kernels::scalar::column_sq_norms(z.data(), d, n, ns.data());
      kernels::avx2::column_sq_norms(z.data(), d, n, nv.data());
      for (std::size_t t = 0; t < n; ++t) CHECK(nv[t] == doctest::Approx(ns[t]).epsilon(1e-14));
    }
  }
}

TEST_CASE("dispatch routes to the selected variant") {
  if (!kernels::supported(kernels::Isa::avx2)) return;
  Rng rng(3);
  const std::size_t d = 9, n = 50;
  const auto z = draws(d * n, rng);
  std::vector<double> w(n, 1.0), a(d * d, 0.0), b(d * d, 0.0);
  const auto before = kernels::active();
  kernels::set_active(kernels::Isa::scalar);
  kernels::weighted_gram(z.data(), d, n, w.data(), a.data());
  kernels::set_active(kernels::Isa::avx2);
  kernels::weighted_gram(z.data(), d, n, w.data(), b.data());
  kernels::set_active(before);
  for (std::size_t i = 0; i < d * d; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13));
}
#else
TEST_CASE("avx2 not built") {
  CHECK_THROWS_AS(kernels::set_active(kernels::Isa::avx2), InvalidParameter);
}
#endif
