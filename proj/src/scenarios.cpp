#include "mmar/scenarios.hpp"

#include <Eigen/QR>

#include <cmath>
#include <cstdlib>

#include "mmar/error.hpp"
#include "mmar/model_io.hpp"

#ifndef MMAR_SCENARIO_DIR
#define MMAR_SCENARIO_DIR "data/scenarios"
#endif

namespace mmar {

namespace {

// A_{1,1} of the first scenario is fixed rather than drawn.
Matrix scenario1_a11() {
  Matrix a(2, 2);
  a << -0.752, 0.662, 0.694, 0.844;
  return a;
}

Matrix random_spd(Index n, Rng& rng) {
  const Matrix q = random_orthogonal(n, rng);
  Vector lambda(n);
  for (Index i = 0; i < n; ++i) lambda(i) = std::abs(std_normal(rng));
  Matrix s = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

double component_radius(const MmarComponent& c, Index m, Index n) {
  MmarModel one;
  one.spec.m = m;
  one.spec.n = n;
  one.spec.orders = {static_cast<int>(c.A.size())};
  one.components = {c};
  one.alphas = {1.0};
  return spectral_radius(companion_matrix(one, 0));
}

// Common scale s of the A matrices with rho(Phi(s)) = target. rho(Phi(s)) is
// continuous, zero at s = 0 and unbounded, so bisection on a bracket works.
void scale_to_radius(MmarComponent& c, Index m, Index n, double target) {
  const std::vector<Matrix> base = c.A;
  auto radius_at = [&](double s) {
    for (std::size_t i = 0; i < base.size(); ++i) c.A[i] = s * base[i];
    return component_radius(c, m, n);
  };
  double hi = 1.0;
  while (radius_at(hi) < target) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (radius_at(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  radius_at(0.5 * (lo + hi));
}

// Unit-norm B on a random line through Gaussian matrices with
// rho(B) = target; used when A is held fixed.
Matrix unit_b_with_radius(Index n, double target, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Matrix g1 = normal_matrix(n, n, rng);
    const Matrix g2 = normal_matrix(n, n, rng);
    auto at = [&](double s) {
      Matrix b = g1 + s * g2;
      b /= b.norm();
      return b;
    };
    auto f = [&](double s) { return spectral_radius(at(s)) - target; };
    constexpr int kSteps = 400;
    double prev_s = -10.0;
    double prev_f = f(prev_s);
    for (int i = 1; i <= kSteps; ++i) {
      const double s = -10.0 + 20.0 * i / kSteps;
      const double fs = f(s);
      if ((prev_f < 0.0) != (fs < 0.0)) {
        double lo = prev_s;
        double hi = s;
        const bool lo_neg = prev_f < 0.0;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          if ((f(mid) < 0.0) == lo_neg)
            lo = mid;
          else
            hi = mid;
        }
        Matrix b = at(0.5 * (lo + hi));
        if (b(0, 0) < 0.0) b = -b;
        return b;
      }
      prev_s = s;
      prev_f = fs;
    }
  }
  throw NumericalError("scenario generation: no unit-norm B with the requested radius found");
}

}  // namespace

Matrix random_orthogonal(Index n, Rng& rng) {
  const Matrix g = normal_matrix(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

std::vector<std::string> scenario_names() { return {"scenario1", "scenario2", "scenario3", "scenario4"}; }

ScenarioSpec scenario_spec(const std::string& name) {
  ScenarioSpec s;
  s.name = name;
  if (name == "scenario1") {
    s.spec = MmarSpec::uniform(2, 3, 2, 1);
    s.alphas = {0.4, 0.6};
    s.radii = {0.7660, 0.9516};
    s.seed = 1001;
  } else if (name == "scenario2") {
    s.spec = MmarSpec::uniform(4, 5, 2, 1);
    s.alphas = {0.4, 0.6};
    s.radii = {0.6682, 1.0136};
    s.seed = 1002;
  } else if (name == "scenario3") {
    s.spec = MmarSpec::uniform(2, 3, 2, 2);
    s.alphas = {0.4, 0.6};
    s.radii = {0.8399, 0.6691};
    s.seed = 1003;
  } else if (name == "scenario4") {
    s.spec = MmarSpec::uniform(4, 5, 3, 1);
    s.alphas = {0.1, 0.2, 0.7};
    s.radii = {0.6682, 1.0136, 0.6537};
    s.seed = 1004;
  } else {
    throw InvalidParameter("unknown scenario '" + name + "' (expected scenario1..scenario4)");
  }
  return s;
}

MmarModel generate_scenario(const ScenarioSpec& s) {
  const Index m = s.spec.m;
  const Index n = s.spec.n;
  Rng rng(s.seed);
  MmarModel model;
  model.spec = s.spec;
  model.alphas = s.alphas;
  for (int k = 0; k < s.spec.K(); ++k) {
    MmarComponent c;
    const int p = s.spec.orders[static_cast<std::size_t>(k)];
    for (int i = 0; i < p; ++i) {
      c.A.push_back(normal_matrix(m, m, rng));
      Matrix b = normal_matrix(n, n, rng);
      b /= b.norm();
      if (b(0, 0) < 0.0) b = -b;
      c.B.push_back(b);
    }
    c.C = normal_matrix(m, n, rng);
    c.U = random_spd(m, rng);
    c.V = random_spd(n, rng);
    const double target = s.radii[static_cast<std::size_t>(k)];
    if (s.name == "scenario1" && k == 0) {
      c.A[0] = scenario1_a11();
      c.B[0] = unit_b_with_radius(n, target / spectral_radius(c.A[0]), rng);
    } else {
      scale_to_radius(c, m, n, target);
    }
    model.components.push_back(std::move(c));
  }
  return normalize(model);
}

MmarModel generate_scenario(const std::string& name, std::uint64_t seed) {
  ScenarioSpec s = scenario_spec(name);
  s.seed = seed;
  return generate_scenario(s);
}

std::filesystem::path scenario_dir() {
  if (const char* env = std::getenv("MMAR_SCENARIO_DIR")) return env;
  return MMAR_SCENARIO_DIR;
}

MmarModel load_scenario(const std::string& name) {
  scenario_spec(name);
  return load_model(scenario_dir() / (name + ".json"));
}

}  // namespace mmar
