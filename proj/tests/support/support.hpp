#pragma once

// Models, data and independent reference computations shared by the tests.

#include <complex>
#include <cmath>
#include <vector>

#include "mmar/linalg.hpp"
#include "mmar/model.hpp"
#include "mmar/rng.hpp"

namespace mmar::test {

inline Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Two-component 2 x 2 example, alpha = (0.4, 0.6), one stable and one explosive component.
inline MmarModel example1() {
  MmarModel mdl;
  mdl.spec = MmarSpec::uniform(2, 2, 2, 1);
  const Matrix I = Matrix::Identity(2, 2);
  mdl.components = {
      {{mat2(0.5, 0.7, 0.55, 0.4)}, {mat2(0.3, 0.4, 0.6, 0.3)}, Matrix::Zero(2, 2), I, I},
      {{mat2(1.1, 0.2, 0.4, 1.2)}, {mat2(0.6, 0.3, 0.2, 0.4)}, Matrix::Zero(2, 2), I, I}};
  mdl.alphas = {0.4, 0.6};
  return mdl;
}

inline Matrix random_spd(Index n, Rng& rng, double jitter = 0.3) {
  const Matrix g = normal_matrix(n, n, rng);
  return g * g.transpose() / static_cast<double>(n) + jitter * Matrix::Identity(n, n);
}

// Random model whose component companion matrices have spectral radius
// `radius` (A and B scaled by the same factor).
inline MmarModel random_model(Rng& rng, Index m, Index n, const std::vector<int>& orders, double radius = 0.6) {
  MmarModel mdl;
  mdl.spec.m = m;
  mdl.spec.n = n;
  mdl.spec.orders = orders;
  double rest = 1.0;
  const int K = static_cast<int>(orders.size());
  for (int k = 0; k < K; ++k) {
    MmarComponent c;
    for (int i = 0; i < orders[static_cast<std::size_t>(k)]; ++i) {
      c.A.push_back(normal_matrix(m, m, rng));
      c.B.push_back(normal_matrix(n, n, rng));
    }
    c.C = 2.0 * normal_matrix(m, n, rng);
    c.U = random_spd(m, rng);
    c.V = random_spd(n, rng);
    mdl.components.push_back(c);
    MmarModel one;
    one.spec.m = m;
    one.spec.n = n;
    one.spec.orders = {orders[static_cast<std::size_t>(k)]};
    one.components = {c};
    one.alphas = {1.0};
    // rho is homogeneous of degree one in a common scale of all A_i only for
    // p = 1; for p > 1 bisect.
    double lo = 0.0, hi = 1.0;
    auto rho_at = [&](double s) {
      for (std::size_t i = 0; i < c.A.size(); ++i) one.components[0].A[i] = s * c.A[i];
      return spectral_radius(companion_matrix(one, 0));
    };
    while (rho_at(hi) < radius) hi *= 2.0;
    for (int it = 0; it < 100; ++it) (rho_at(0.5 * (lo + hi)) < radius ? lo : hi) = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < c.A.size(); ++i) mdl.components.back().A[i] = 0.5 * (lo + hi) * c.A[i];
    const double a = k + 1 < K ? (0.5 + uniform01(rng)) / K : rest;
    mdl.alphas.push_back(a);
    rest -= a;
  }
  return mdl;
}

inline MatrixSeries random_series(Rng& rng, Index m, Index n, Index T) {
  return MatrixSeries(m, n, normal_matrix(m * n, T, rng));
}

// ---- oracles ------------------------------------------------------------------

// log N(x | mu, S) with an explicit dense covariance, via LU.
inline double mvn_logpdf(const Vector& x, const Vector& mu, const Matrix& S) {
  const Eigen::FullPivLU<Matrix> lu(S);
  const Vector d = x - mu;
  const double quad = d.dot(lu.solve(d));
  double logdet = 0.0;
  const Matrix u = lu.matrixLU().triangularView<Eigen::Upper>();
  for (Index i = 0; i < u.rows(); ++i) logdet += std::log(std::abs(u(i, i)));
  return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * M_PI) + logdet + quad);
}

// Mixture log-density of the window from the vectorized form
// vec Y_t = vec C + sum (B (x) A) vec Y_{t-i} + e, e ~ N(0, V (x) U).
inline double vec_form_log_density(const MmarModel& mdl, const std::vector<Matrix>& window) {
  const int p = mdl.spec.p_max();
  const Vector y = vec(window.back());
  double acc = 0.0;
  std::vector<double> logs;
  for (int k = 0; k < mdl.spec.K(); ++k) {
    const auto& c = mdl.components[static_cast<std::size_t>(k)];
    Vector mu = vec(c.C);
    for (std::size_t i = 0; i < c.A.size(); ++i)
      mu += kron(c.B[i], c.A[i]) * vec(window[static_cast<std::size_t>(p - 1 - static_cast<int>(i))]);
    logs.push_back(std::log(mdl.alphas[static_cast<std::size_t>(k)]) + mvn_logpdf(y, mu, kron(c.V, c.U)));
  }
  double mx = logs[0];
  for (double l : logs) mx = std::max(mx, l);
  for (double l : logs) acc += std::exp(l - mx);
  return mx + std::log(acc);
}

// Characteristic polynomial coefficients (monic, highest first) by
// Faddeev-LeVerrier, then all roots by Durand-Kerner iteration.
inline std::vector<std::complex<double>> durand_kerner_eigenvalues(const Matrix& a) {
  const Index n = a.rows();
  std::vector<double> c(static_cast<std::size_t>(n + 1));
  c[0] = 1.0;
  Matrix M = Matrix::Zero(n, n);
  for (Index k = 1; k <= n; ++k) {
    M = a * M + c[static_cast<std::size_t>(k - 1)] * Matrix::Identity(n, n);
    c[static_cast<std::size_t>(k)] = -(a * M).trace() / static_cast<double>(k);
  }
  using C = std::complex<double>;
  auto poly = [&](C z) {
    C v = 1.0;
    for (Index k = 1; k <= n; ++k) v = v * z + c[static_cast<std::size_t>(k)];
    return v;
  };
  double bound = 0.0;
  for (Index k = 1; k <= n; ++k) bound = std::max(bound, std::abs(c[static_cast<std::size_t>(k)]));
  std::vector<C> z(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = (1.0 + bound) * std::pow(C(0.4, 0.9), static_cast<double>(i));
  for (int it = 0; it < 5000; ++it) {
    double change = 0.0;
    for (Index i = 0; i < n; ++i) {
      C den = 1.0;
      for (Index j = 0; j < n; ++j)
        if (j != i) den *= z[static_cast<std::size_t>(i)] - z[static_cast<std::size_t>(j)];
      const C step = poly(z[static_cast<std::size_t>(i)]) / den;
      z[static_cast<std::size_t>(i)] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15) break;
  }
  return z;
}

inline double oracle_spectral_radius(const Matrix& a) {
  double r = 0.0;
  for (const auto& z : durand_kerner_eigenvalues(a)) r = std::max(r, std::abs(z));
  return r;
}

inline double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

inline double normal_cdf(double x, double mu, double sd) { return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0))); }

struct BruteHdr {
  std::vector<std::pair<double, double>> intervals;
  double cell = 0.0;
};

// Threshold search on a fine uniform grid: the highest density grid cells
// are accumulated (midpoint rule) until `level` mass is reached.
inline BruteHdr brute_force_hdr(const std::vector<double>& w, const std::vector<double>& mu,
                                const std::vector<double>& sd, double level, int points) {
  double lo = mu[0] - 6 * sd[0], hi = mu[0] + 6 * sd[0];
  for (std::size_t k = 0; k < w.size(); ++k) {
    lo = std::min(lo, mu[k] - 6 * sd[k]);
    hi = std::max(hi, mu[k] + 6 * sd[k]);
  }
  const double h = (hi - lo) / (points - 1);
  std::vector<double> x(static_cast<std::size_t>(points)), f(x.size());
  for (int i = 0; i < points; ++i) {
    x[static_cast<std::size_t>(i)] = lo + h * i;
    double v = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) v += w[k] * normal_pdf(x[static_cast<std::size_t>(i)], mu[k], sd[k]);
    f[static_cast<std::size_t>(i)] = v;
  }
  std::vector<double> sorted = f;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double mass = 0.0, thr = 0.0;
  for (double v : sorted) {
    mass += v * h;
    thr = v;
    if (mass >= level) break;
  }
  BruteHdr out;
  out.cell = h;
  bool in = false;
  double start = 0.0;
  for (int i = 0; i < points; ++i) {
    const bool above = f[static_cast<std::size_t>(i)] >= thr;
    if (above && !in) start = x[static_cast<std::size_t>(i)];
    if (!above && in) out.intervals.push_back({start, x[static_cast<std::size_t>(i - 1)]});
    in = above;
  }
  if (in) out.intervals.push_back({start, x.back()});
  return out;
}

}  // namespace mmar::test
