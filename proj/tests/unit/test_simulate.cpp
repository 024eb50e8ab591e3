#include <doctest.h>

#include "mmar/error.hpp"
#include "mmar/simulate.hpp"
#include "support.hpp"

using namespace mmar;
using namespace mmar::test;

TEST_CASE("same seed gives the same path; different seeds differ") {
  Rng rng(1);
  const MmarModel mdl = random_model(rng, 2, 3, {1, 2});
  const auto a = simulate(mdl, 200, 50, 42);
  const auto b = simulate(mdl, 200, 50, 42);
  const auto c = simulate(mdl, 200, 50, 43);
  CHECK(a.series.stacked() == b.series.stacked());
  CHECK(a.labels == b.labels);
  CHECK(a.series.stacked() != c.series.stacked());
  CHECK(a.series.length() == 200);
  CHECK(a.labels.size() == 200);
  CHECK(a.rng == std::string(kRngName));
}

TEST_CASE("label frequencies follow alpha") {
  Rng rng(2);
  MmarModel mdl = random_model(rng, 1, 2, {1, 1, 1});
  mdl.alphas = {0.2, 0.3, 0.5};
  const auto sim = simulate(mdl, 20000, 0, 7);
  std::vector<int> counts(3, 0);
  for (int l : sim.labels) ++counts[static_cast<std::size_t>(l - 1)];
  for (int k = 0; k < 3; ++k) {
    const double p = mdl.alphas[static_cast<std::size_t>(k)];
    const double se = std::sqrt(p * (1 - p) / 20000.0);
    CHECK(std::abs(counts[static_cast<std::size_t>(k)] / 20000.0 - p) < 5 * se);
  }
}

TEST_CASE("scalar AR(1) moments") {
  // y_t = c + a y_{t-1} + e, var e = s2: mean c/(1-a), variance s2/(1-a^2).
  MmarModel mdl;
  mdl.spec = MmarSpec::uniform(1, 1, 1, 1);
  const double a = 0.6, c = 1.0, s2 = 0.5;
  mdl.components = {{{Matrix::Constant(1, 1, a)}, {Matrix::Constant(1, 1, 1.0)}, Matrix::Constant(1, 1, c),
                     Matrix::Constant(1, 1, s2), Matrix::Constant(1, 1, 1.0)}};
  mdl.alphas = {1.0};
  const auto sim = simulate(mdl, 200000, 500, 3);
  const Vector y = sim.series.stacked().row(0).transpose();
  const double mean = y.mean();
  const double var = (y.array() - mean).square().mean();
  CHECK(mean == doctest::Approx(c / (1 - a)).epsilon(0.01));
  CHECK(var == doctest::Approx(s2 / (1 - a * a)).epsilon(0.02));
}

TEST_CASE("matrix-normal draws have covariance V kron U") {
  Rng rng(4);
  const Matrix u = random_spd(2, rng), v = random_spd(2, rng);
  const SpdMatrix su(u), sv(v);
  Matrix acc = Matrix::Zero(4, 4);
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    const Vector e = vec(draw_matrix_normal(Matrix::Zero(2, 2), su, sv, rng));
    acc += e * e.transpose();
  }
  acc /= N;
  CHECK((acc - kron(v, u)).cwiseAbs().maxCoeff() < 0.03 * kron(v, u).cwiseAbs().maxCoeff());
}

TEST_CASE("explosive model trips the divergence guard; bad arguments are rejected") {
  MmarModel mdl = example1();
  mdl.alphas = {0.01, 0.99};
  mdl.components[1].A[0] *= 3.0;
  CHECK_THROWS_AS(simulate(mdl, 5000, 0, 1), NumericalError);
  CHECK_THROWS(simulate(example1(), 0, 10, 1));
  CHECK_THROWS(simulate(example1(), 10, -1, 1));
}
