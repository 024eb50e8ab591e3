#include <doctest.h>

#include "mmar/error.hpp"
#include "mmar/estimate.hpp"
#include "mmar/forecast.hpp"
#include "mmar/simulate.hpp"
#include "support.hpp"

using namespace mmar;
using namespace mmar::test;

TEST_CASE("conditional mean is the weighted component mean") {
  Rng rng(1);
  const MmarModel mdl = random_model(rng, 2, 3, {1, 2});
  const std::vector<Matrix> lags{normal_matrix(2, 3, rng), normal_matrix(2, 3, rng)};
  Matrix expect = Matrix::Zero(2, 3);
  for (int k = 0; k < 2; ++k) {
    const auto& c = mdl.components[static_cast<std::size_t>(k)];
    Matrix mu = c.C;
    for (std::size_t i = 0; i < c.A.size(); ++i) mu += c.A[i] * lags[1 - i] * c.B[i].transpose();
    expect += mdl.alphas[static_cast<std::size_t>(k)] * mu;
  }
  CHECK((conditional_mean(mdl, lags) - expect).norm() < 1e-13);
  CHECK_THROWS_AS(conditional_mean(mdl, std::vector<Matrix>{lags[0]}), DimensionError);
}

TEST_CASE("unimodal HDR is the central interval") {
  const auto pm = mixture_hdr({1.0}, {2.0}, {0.5}, 0.95);
  REQUIRE(pm.hdr.size() == 1);
  const double cell = pm.grid(1) - pm.grid(0);
  CHECK(std::abs(pm.hdr[0].lo - (2.0 - 0.5 * 1.959963984540054)) < cell);
  CHECK(std::abs(pm.hdr[0].hi - (2.0 + 0.5 * 1.959963984540054)) < cell);
  CHECK(pm.hdr_mass == doctest::Approx(0.95).epsilon(1e-3));
}

TEST_CASE("bimodal HDR matches a brute-force threshold search") {
  const std::vector<double> w{0.45, 0.55}, mu{-2.0, 2.5}, sd{0.6, 0.9};
  const auto pm = mixture_hdr(w, mu, sd, 0.9);
  const auto bf = brute_force_hdr(w, mu, sd, 0.9, 200001);
  REQUIRE(pm.hdr.size() == 2);
  REQUIRE(bf.intervals.size() == 2);
  const double cell = pm.grid(1) - pm.grid(0);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(pm.hdr[i].lo - bf.intervals[i].first) < cell);
    CHECK(std::abs(pm.hdr[i].hi - bf.intervals[i].second) < cell);
  }
  double mass = 0.0;
  for (const auto& h : pm.hdr)
    for (std::size_t k = 0; k < 2; ++k) mass += w[k] * (normal_cdf(h.hi, mu[k], sd[k]) - normal_cdf(h.lo, mu[k], sd[k]));
  CHECK(mass == doctest::Approx(pm.hdr_mass).epsilon(1e-12));
  CHECK(pm.hdr_mass >= 0.9 - 1e-3);
}

TEST_CASE("density integrates to one; level one spans the grid") {
  const auto pm = mixture_hdr({0.3, 0.7}, {0.0, 1.0}, {1.0, 0.2}, 0.5);
  const double cell = pm.grid(1) - pm.grid(0);
  CHECK(pm.density.sum() * cell == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(mixture_hdr({1.0}, {0.0}, {0.0}, 0.5), InvalidParameter);
  const auto all = mixture_hdr({1.0}, {0.0}, {1.0}, 1.0);
  REQUIRE(all.hdr.size() == 1);
  CHECK(all.hdr[0].lo == all.grid(0));
}

TEST_CASE("predictive marginal uses U(i,i) V(j,j)") {
  Rng rng(2);
  const MmarModel mdl = random_model(rng, 2, 3, {1, 1});
  const std::vector<Matrix> lags{normal_matrix(2, 3, rng)};
  const auto pm = predictive_marginal(mdl, lags, 1, 2);
  for (int k = 0; k < 2; ++k) {
    const auto& c = mdl.components[static_cast<std::size_t>(k)];
    CHECK(pm.sds[static_cast<std::size_t>(k)] == doctest::Approx(std::sqrt(c.U(1, 1) * c.V(2, 2))));
    CHECK(pm.means[static_cast<std::size_t>(k)] ==
          doctest::Approx((c.C + c.A[0] * lags[0] * c.B[0].transpose())(1, 2)));
  }
  CHECK_THROWS_AS(predictive_marginal(mdl, lags, 2, 0), DimensionError);
}

TEST_CASE("residual labels follow the largest responsibility") {
  Rng rng(3);
  const MmarModel mdl = normalize(random_model(rng, 2, 2, {1, 1}));
  const auto data = simulate(mdl, 50, 20, 4).series;
  const Residuals r = residuals(mdl, data);
  REQUIRE(r.labels.size() == 49);
  const auto tau = e_step(mdl, data);
  for (Index t = 0; t < 49; ++t) {
    Index best = 0;
    tau.row(t).maxCoeff(&best);
    CHECK(r.labels[static_cast<std::size_t>(t)] == best + 1);
    const auto& c = mdl.components[static_cast<std::size_t>(best)];
    const Matrix e = data.at(t + 1) - c.C - c.A[0] * data.at(t) * c.B[0].transpose();
    CHECK((Matrix(r.residuals.at(t)) - e).norm() < 1e-12);
  }
  const auto z = standardized_residuals(mdl, data);
  CHECK(z.length() == 49);
}

TEST_CASE("mspe") {
  const std::vector<Matrix> f{Matrix::Zero(2, 2), Matrix::Ones(2, 2)};
  const std::vector<Matrix> a{Matrix::Ones(2, 2), Matrix::Ones(2, 2)};
  CHECK(mspe(f, a) == doctest::Approx(2.0));
  CHECK_THROWS_AS(mspe(f, {a[0]}), DimensionError);
}
