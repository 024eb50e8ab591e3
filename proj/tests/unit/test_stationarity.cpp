#include <doctest.h>

#include <cmath>

#include "mmar/error.hpp"
#include "mmar/stationarity.hpp"
#include "support.hpp"

using namespace mmar;
using namespace mmar::test;

TEST_CASE("two-component 2 x 2 example: radii and stationarity verdicts") {
  const MmarModel mdl = example1();
  const auto r = stationarity_report(mdl);
  CHECK(r.component_radii[0] == doctest::Approx(0.8471).epsilon(1e-3));
  CHECK(r.component_radii[1] == doctest::Approx(1.0989).epsilon(1e-3));
  CHECK_FALSE(r.mean.holds);
  REQUIRE(r.second_order);
  CHECK_FALSE(r.second_order->holds);
  // sum alpha log rho from the radii themselves
  const double direct = 0.4 * std::log(r.component_radii[0]) + 0.6 * std::log(r.component_radii[1]);
  CHECK(r.strict.value == doctest::Approx(direct).epsilon(1e-14));
  REQUIRE(r.strict_simplified);
  CHECK(*r.strict_simplified == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("criterion matrices match directly summed oracles") {
  Rng rng(5);
  const MmarModel mdl = random_model(rng, 2, 2, {1, 1}, 0.8);
  Matrix mean = Matrix::Zero(4, 4), second = Matrix::Zero(16, 16);
  for (int k = 0; k < 2; ++k) {
    const auto& c = mdl.components[static_cast<std::size_t>(k)];
    const Matrix phi = kron(c.B[0], c.A[0]);
    mean += mdl.alphas[static_cast<std::size_t>(k)] * phi;
    second += mdl.alphas[static_cast<std::size_t>(k)] * kron(phi, phi);
  }
  CHECK(check_mean_stationarity(mdl).value == doctest::Approx(oracle_spectral_radius(mean)).epsilon(1e-9));
  CHECK(check_second_order_stationarity(mdl).value == doctest::Approx(oracle_spectral_radius(second)).epsilon(1e-9));
}

TEST_CASE("K = 1 identities") {
  Rng rng(6);
  const MmarModel mdl = random_model(rng, 2, 3, {1}, 0.7);
  const double rho = spectral_radius(companion_matrix(mdl, 0));
  CHECK(rho == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(check_second_order_stationarity(mdl).value == doctest::Approx(rho * rho).epsilon(1e-9));
  CHECK(check_strict_sufficient(mdl).value == doctest::Approx(std::log(rho)).epsilon(1e-12));
  CHECK(check_qth_moment(mdl, 4).weighted == doctest::Approx(std::pow(rho, 4)).epsilon(1e-12));
}

TEST_CASE("criteria are invariant under normalization") {
  Rng rng(8);
  MmarModel mdl = random_model(rng, 2, 2, {1, 2}, 0.9);
  mdl.components[0].B[0] *= 3.0;
  mdl.components[0].A[0] /= 3.0;
  const MmarModel nm = normalize(mdl);
  const auto a = stationarity_report(mdl), b = stationarity_report(nm);
  // normalize reorders by alpha; compare the order-free summaries
  CHECK(a.strict.value == doctest::Approx(b.strict.value).epsilon(1e-10));
  CHECK(a.mean.value == doctest::Approx(b.mean.value).epsilon(1e-10));
  CHECK(a.companion_extension);
}

TEST_CASE("zero radius gives -inf strict value") {
  MmarModel mdl = example1();
  mdl.components[0].A[0] << 0.0, 1.0, 0.0, 0.0;  // nilpotent
  const auto s = check_strict_sufficient(mdl);
  CHECK(std::isinf(s.value));
  CHECK(s.value < 0.0);
  CHECK(s.holds);
}

TEST_CASE("second-order criterion respects the row cap") {
  Rng rng(9);
  const MmarModel big = random_model(rng, 4, 5, {1});
  CHECK_THROWS_AS(check_second_order_stationarity(big, 100), InvalidParameter);
  const auto r = stationarity_report(big, StationarityOptions{{2.0}, 100});
  CHECK_FALSE(r.second_order);
  CHECK_FALSE(r.second_order_note.empty());
}

TEST_CASE("Lyapunov estimate for K = 1 approaches log rho") {
  Rng rng(10);
  const MmarModel mdl = random_model(rng, 2, 2, {1}, 0.8);
  const auto ly = estimate_lyapunov(mdl, 2000, 20, 1);
  CHECK(std::abs(ly.gamma - std::log(0.8)) < 0.01);
  const auto again = estimate_lyapunov(mdl, 2000, 20, 1);
  CHECK(again.gamma == ly.gamma);
}

TEST_CASE("Lyapunov exponent of the 2 x 2 example is negative") {
  const auto ly = estimate_lyapunov(example1(), 2000, 100, 4);
  CHECK(ly.gamma < 0.0);
  CHECK(ly.se > 0.0);
}
