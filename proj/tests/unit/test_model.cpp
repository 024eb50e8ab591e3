#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <filesystem>

#include "mmar/error.hpp"
#include "mmar/model.hpp"
#include "mmar/model_io.hpp"
#include "mmar/theta.hpp"
#include "support.hpp"

using namespace mmar;
using namespace mmar::test;

namespace {

std::vector<Matrix> random_window(Rng& rng, Index m, Index n, int p) {
  std::vector<Matrix> w;
  for (int i = 0; i <= p; ++i) w.push_back(normal_matrix(m, n, rng));
  return w;
}

}  // namespace

TEST_CASE("param_dim closed form") {
  CHECK(param_dim(MmarSpec::uniform(1, 1, 1, 1)) == 3);
  CHECK(param_dim(MmarSpec::uniform(2, 3, 2, 1)) == 53);
  CHECK(param_dim(MmarSpec::uniform(2, 2, 2, 1)) == 33);
  CHECK(param_dim(MmarSpec::uniform(4, 5, 3, 1)) == 254);
  MmarSpec mixed;
  mixed.m = 2;
  mixed.n = 3;
  mixed.orders = {1, 2};
  CHECK(param_dim(mixed) == 53 + 12);
}

TEST_CASE("spec validation") {
  MmarSpec s;
  s.m = 2;
  s.n = 2;
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  s.orders = {1, 0};
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  s.orders = {1, 3};
  CHECK(s.p_max() == 3);
}

TEST_CASE("mixture density equals the vectorized form on random models") {
  Rng rng(101);
  for (int rep = 0; rep < 40; ++rep) {
    const Index m = 1 + rep % 3, n = 1 + (rep / 2) % 3;
    const int K = 1 + rep % 3;
    std::vector<int> orders;
    for (int k = 0; k < K; ++k) orders.push_back(1 + (rep + k) % 2);
    const MmarModel mdl = random_model(rng, m, n, orders);
    const auto w = random_window(rng, m, n, mdl.spec.p_max());
    CHECK(conditional_log_density(mdl, w).mixture == doctest::Approx(vec_form_log_density(mdl, w)).epsilon(1e-12));
  }
}

TEST_CASE("K = 1 density is the matrix-normal density; identical components collapse") {
  Rng rng(7);
  MmarModel one = random_model(rng, 2, 3, {1});
  const auto w = random_window(rng, 2, 3, 1);
  const auto& c = one.components[0];
  const double direct =
      matrix_normal_logpdf(w[1], c.C + c.A[0] * w[0] * c.B[0].transpose(), SpdMatrix(c.U), SpdMatrix(c.V));
  CHECK(conditional_log_density(one, w).mixture == doctest::Approx(direct).epsilon(1e-13));

  MmarModel two = one;
  two.spec = MmarSpec::uniform(2, 3, 2, 1);
  two.components = {c, c};
  two.alphas = {0.4, 0.6};
  CHECK(conditional_log_density(two, w).mixture == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("normalize: constraints hold, density is preserved, idempotent") {
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    MmarModel mdl = random_model(rng, 2, 3, {1, 2, 1});
    // random rescaling of B against A and of V against U
    for (auto& comp : mdl.components) {
      for (std::size_t i = 0; i < comp.A.size(); ++i) {
        const double s = (rep % 2 ? -1.0 : 1.0) * (0.3 + uniform01(rng));
        comp.B[i] *= s;
        comp.A[i] /= s;
      }
      const double r = 0.2 + 3.0 * uniform01(rng);
      comp.V *= r;
      comp.U /= r;
    }
    const MmarModel nm = normalize(mdl);
    for (const auto& comp : nm.components) {
      for (const auto& b : comp.B) {
        CHECK(b.norm() == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(b(0, 0) > 0.0);
      }
      CHECK(vech(SpdMatrix(comp.V).inverse()).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (std::size_t k = 1; k < nm.alphas.size(); ++k) CHECK(nm.alphas[k - 1] <= nm.alphas[k]);
    for (int w = 0; w < 5; ++w) {
      const auto win = random_window(rng, 2, 3, 2);
      CHECK(conditional_log_density(nm, win).mixture ==
            doctest::Approx(conditional_log_density(mdl, win).mixture).epsilon(1e-10));
    }
    const MmarModel twice = normalize(nm);
    for (std::size_t k = 0; k < nm.components.size(); ++k) {
      CHECK((twice.components[k].A[0] - nm.components[k].A[0]).norm() < 1e-14);
      CHECK((twice.components[k].U - nm.components[k].U).norm() < 1e-13);
    }
  }
}

TEST_CASE("normalize rejects a zero B") {
  MmarModel mdl = example1();
  mdl.components[0].B[0].setZero();
  CHECK_THROWS_AS(normalize(mdl), InvalidParameter);
}

TEST_CASE("companion matrices") {
  Rng rng(19);
  const MmarModel p1 = random_model(rng, 2, 2, {1});
  const auto& c = p1.components[0];
  CHECK((companion_matrix(p1, 0) - kron(c.B[0], c.A[0])).norm() == 0.0);

  MmarSpec s;
  s.m = 2;
  s.n = 3;
  s.orders = {1, 2};
  MmarModel mixed = random_model(rng, 2, 3, {1, 2});
  const Matrix phi1 = companion_matrix(mixed, 0);
  REQUIRE(phi1.rows() == 12);
  CHECK(phi1.block(0, 6, 6, 6).norm() == 0.0);

  // Two-lag recursion against the companion state update.
  const auto& c2 = mixed.components[1];
  const Matrix y1 = normal_matrix(2, 3, rng), y2 = normal_matrix(2, 3, rng);
  Vector state(12);
  state << vec(y1), vec(y2);
  const Vector next = companion_matrix(mixed, 1) * state;
  const Matrix direct = c2.A[0] * y1 * c2.B[0].transpose() + c2.A[1] * y2 * c2.B[1].transpose();
  CHECK((next.head(6) - vec(direct)).norm() < 1e-13);
  CHECK((next.tail(6) - vec(y1)).norm() == 0.0);
}

TEST_CASE("constrained VAR form") {
  Rng rng(29);
  MmarModel mdl = random_model(rng, 2, 3, {1, 1});
  mdl.components[0].C.setZero();
  const auto vars = to_constrained_var(mdl);
  CHECK(vars[0].psi0.norm() == 0.0);
  CHECK(vars[1].psi[0].size() == 36);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(vars[1].omega);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("theta: round trip, length, Jacobian, radicand violation") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const MmarModel mdl = normalize(random_model(rng, 2, 3, {1 + rep % 2, 1}));
    const ThetaVector th = pack_theta(mdl);
    CHECK(th.values.size() == param_dim(mdl.spec));
    const MmarModel back = unpack_theta(th);
    CHECK((pack_theta(back).values - th.values).norm() < 1e-12);
    for (std::size_t k = 0; k < mdl.components.size(); ++k) {
      CHECK((back.components[k].B[0] - mdl.components[k].B[0]).norm() < 1e-12);
      CHECK((back.components[k].V - mdl.components[k].V).norm() < 1e-10);
    }
    // Jacobian against central differences of theta_to_gamma, extrapolated
    // from h and h/10: some draws sit close to the square-root boundary of
    // the reconstructed B entry, where plain differences carry O(h^2) errors
    // of 1e-1.
    const Matrix jac = theta_jacobian(th);
    for (Index j = 0; j < th.values.size(); ++j) {
      const auto cd = [&](double h) {
        ThetaVector a = th, b = th;
        a.values(j) += h;
        b.values(j) -= h;
        return Vector((theta_to_gamma(a) - theta_to_gamma(b)) / (2 * h));
      };
      const Vector fd = (100.0 * cd(1e-7) - cd(1e-6)) / 99.0;
      CHECK((fd - jac.col(j)).norm() < 1e-7 * (1.0 + jac.col(j).norm()));
    }
  }
  ThetaVector bad = pack_theta(normalize(example1()));
  bad.values.segment(ParamLayout::theta(bad.spec).comps[0].b[0], 3).setConstant(0.9);
  CHECK_THROWS_AS(unpack_theta(bad), InvalidParameter);
}

TEST_CASE("model JSON round trip is bit-exact; malformed input is a data error") {
  Rng rng(37);
  const MmarModel mdl = random_model(rng, 2, 3, {2, 1});
  const MmarModel back = model_from_json(nlohmann::json::parse(model_to_json(mdl).dump()));
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(back.components[k].A[0] == mdl.components[k].A[0]);
    CHECK(back.components[k].U == mdl.components[k].U);
  }
  CHECK(back.alphas == mdl.alphas);
  const auto path = std::filesystem::temp_directory_path() / "mmar_model_io_test.json";
  save_model(mdl, path);
  CHECK(load_model(path).components[1].V == mdl.components[1].V);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse("{\"format\": \"nope\"}")), DataError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), DataError);
}

TEST_CASE("log_sum_exp is stable") {
  const std::vector<double> x{-1000.0, -1000.0};
  CHECK(log_sum_exp(x) == doctest::Approx(-1000.0 + std::log(2.0)));
}

TEST_CASE("distinctness warning for coinciding components") {
  MmarModel mdl = normalize(example1());
  mdl.components[1] = mdl.components[0];
  CHECK_FALSE(distinctness_warnings(mdl).empty());
  CHECK(distinctness_warnings(normalize(example1())).empty());
}
