#include <doctest.h>

#include "mmar/error.hpp"
#include "mmar/inference.hpp"
#include "mmar/simulate.hpp"
#include "support.hpp"

using namespace mmar;
using namespace mmar::test;

namespace {

double point_loglik(const MmarModel& mdl, const MatrixSeries& data, Index t) {
  return conditional_log_density(mdl, make_evals(mdl), data, t).mixture;
}

MmarModel scalar_ar1(double a, double c, double s2) {
  MmarModel mdl;
  mdl.spec = MmarSpec::uniform(1, 1, 1, 1);
  mdl.components = {{{Matrix::Constant(1, 1, a)}, {Matrix::Constant(1, 1, 1.0)}, Matrix::Constant(1, 1, c),
                     Matrix::Constant(1, 1, s2), Matrix::Constant(1, 1, 1.0)}};
  mdl.alphas = {1.0};
  return mdl;
}

}  // namespace

TEST_CASE("per-observation gamma score matches central differences") {
  Rng rng(1);
  for (int rep = 0; rep < 6; ++rep) {
    const MmarModel mdl = normalize(random_model(rng, 1 + rep % 3, 1 + (rep + 1) % 3, {1 + rep % 2, 1}));
    const auto data = simulate(mdl, 20, 20, 100 + rep).series;
    const Index t = mdl.spec.p_max() + 3;
    const Vector g = pack_gamma(mdl);
    const Vector s = score_gamma(mdl, data, t);
    for (Index j = 0; j < g.size(); ++j) {
      const double h = 1e-6 * (1.0 + std::abs(g(j)));
      Vector a = g, b = g;
      a(j) += h;
      b(j) -= h;
      const double fd =
          (point_loglik(unpack_gamma(a, mdl.spec), data, t) - point_loglik(unpack_gamma(b, mdl.spec), data, t)) /
          (2 * h);
      CHECK(s(j) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("theta score matches central differences of the total log-likelihood") {
  Rng rng(2);
  const MmarModel mdl = normalize(random_model(rng, 2, 2, {1, 1}));
  const auto data = simulate(mdl, 50, 20, 7).series;
  const ThetaVector th = pack_theta(mdl);
  const Vector s = total_score_theta(mdl, data);
  for (Index j = 0; j < th.values.size(); ++j) {
    const double h = 1e-6 * (1.0 + std::abs(th.values(j)));
    ThetaVector a = th, b = th;
    a.values(j) += h;
    b.values(j) -= h;
    const double fd = (log_likelihood(unpack_theta(a), data) - log_likelihood(unpack_theta(b), data)) / (2 * h);
    CHECK(s(j) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("batched total score equals the sum of per-observation scores") {
  Rng rng(3);
  const MmarModel mdl = normalize(random_model(rng, 2, 3, {2, 1}));
  const auto data = simulate(mdl, 40, 20, 8).series;
  Vector sum = Vector::Zero(gamma_dim(mdl.spec));
  for (Index t = 2; t < 40; ++t) sum += score_gamma(mdl, data, t);
  CHECK((total_score_gamma(mdl, data) - sum).norm() < 1e-9 * (1.0 + sum.norm()));
  Vector st = Vector::Zero(param_dim(mdl.spec));
  for (Index t = 2; t < 40; ++t) st += score_theta(mdl, data, t);
  CHECK((total_score_theta(mdl, data) - st).norm() < 1e-9 * (1.0 + st.norm()));
}

TEST_CASE("scalar AR(1) information against the closed form") {
  // theta = (a, c, lambda = 1/s2); l = sum 1/2 log lambda - lambda e^2 / 2 + const.
  const MmarModel mdl = scalar_ar1(0.4, 0.2, 1.5);
  const auto data = simulate(mdl, 300, 50, 9).series;
  const double a = 0.4, c = 0.2, lam = 1.0 / 1.5;
  double sxx = 0, sx = 0, sex = 0, se = 0;
  const double N = 299;
  for (Index t = 1; t < 300; ++t) {
    const double x = data.at(t - 1)(0, 0), e = data.at(t)(0, 0) - c - a * x;
    sxx += x * x;
    sx += x;
    sex += e * x;
    se += e;
  }
  Matrix oracle(3, 3);
  oracle << lam * sxx, lam * sx, -sex, lam * sx, lam * N, -se, -sex, -se, N / (2 * lam * lam);
  const Information info = observed_information(mdl, data);
  REQUIRE(info.total.rows() == 3);
  CHECK_FALSE(info.projected);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      CHECK(info.total(i, j) == doctest::Approx(oracle(i, j)).epsilon(1e-6).scale(oracle.norm() * 1e-6));
}

TEST_CASE("opg and hessian information agree at large T") {
  const MmarModel mdl = scalar_ar1(0.5, 0.0, 1.0);
  const auto data = simulate(mdl, 20000, 50, 10).series;
  const Information h = observed_information(mdl, data, InfoMethod::numeric_hessian);
  const Information o = observed_information(mdl, data, InfoMethod::outer_product);
  for (Index i = 0; i < 3; ++i) CHECK(o.total(i, i) == doctest::Approx(h.total(i, i)).epsilon(0.1));
}

TEST_CASE("infer: covariance, delta-method and last-alpha standard errors") {
  Rng rng(4);
  const MmarModel truth = normalize(random_model(rng, 2, 2, {1, 1, 1}, 0.5));
  const auto data = simulate(truth, 600, 50, 11).series;
  const InferenceReport rep = infer(truth, data);
  const Index dim = param_dim(truth.spec);
  REQUIRE(rep.covariance.rows() == dim);
  CHECK(rep.n_obs == 599);
  CHECK((rep.standard_errors.array().square() - rep.covariance.diagonal().array()).abs().maxCoeff() < 1e-14);
  const auto a0 = ParamLayout::theta(truth.spec).alpha;
  const double v = rep.covariance(a0, a0) + rep.covariance(a0 + 1, a0 + 1) + 2 * rep.covariance(a0, a0 + 1);
  CHECK(rep.last_alpha_se == doctest::Approx(std::sqrt(v)).epsilon(1e-12));
  // kept gamma entries inherit theta standard errors unchanged
  const auto gl = ParamLayout::gamma(truth.spec), tl = ParamLayout::theta(truth.spec);
  CHECK(rep.gamma_standard_errors(gl.comps[1].c) == doctest::Approx(rep.standard_errors(tl.comps[1].c)));
  CHECK(rep.gamma_standard_errors(gl.comps[0].b[0]) > 0.0);
}

TEST_CASE("quantiles") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(chi2_quantile(2, 0.95) == doctest::Approx(5.991464547107979).epsilon(1e-13));
  CHECK(chi2_quantile(1, 0.95) == doctest::Approx(1.959963984540054 * 1.959963984540054).epsilon(1e-12));
  CHECK_THROWS_AS(normal_quantile(1.0), InvalidParameter);
  CHECK_THROWS_AS(chi2_quantile(0.0, 0.5), InvalidParameter);
}

TEST_CASE("Wald intervals, marks and joint ellipse") {
  InferenceReport rep;
  rep.theta_hat.spec = MmarSpec::uniform(1, 1, 1, 1);
  rep.theta_hat.values = Vector(3);
  rep.theta_hat.values << 1.0, -0.5, 0.01;
  rep.standard_errors = Vector(3);
  rep.standard_errors << 0.1, 0.1, 0.0;
  rep.covariance = rep.standard_errors.array().square().matrix().asDiagonal();
  const auto iv = wald_intervals(rep, 0.95);
  CHECK(iv[0].mark == '+');
  CHECK(iv[1].mark == '-');
  CHECK(iv[2].mark == '0');
  CHECK(iv[2].lo == iv[2].hi);
  CHECK(iv[0].lo == doctest::Approx(1.0 - 0.1959963984540054));

  rep.covariance = Matrix::Identity(3, 3);
  Vector truth = rep.theta_hat.values;
  truth(0) += 2.0;
  CHECK(joint_ellipse_test(rep, {0, 1}, 0.95, truth));   // 4 < 5.99
  truth(1) += 1.5;
  CHECK_FALSE(joint_ellipse_test(rep, {0, 1}, 0.95, truth));  // 6.25 > 5.99
  rep.covariance(2, 2) = 0.0;
  CHECK_THROWS_AS(joint_ellipse_test(rep, {2}, 0.95, truth), NumericalError);
}

TEST_CASE("score at a boundary theta is an invalid parameter") {
  MmarModel mdl = normalize(example1());
  mdl.components[0].B[0] << -0.5, 0.5, 0.5, 0.5;
  Rng rng(5);
  const auto data = random_series(rng, 2, 2, 10);
  CHECK_THROWS_AS(score_theta(mdl, data, 3), InvalidParameter);
}
