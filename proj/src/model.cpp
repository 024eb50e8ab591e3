#include "mmar/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmar/error.hpp"
#include "mmar/theta.hpp"

namespace mmar {

int MmarSpec::p_max() const {
  return orders.empty() ? 0 : *std::max_element(orders.begin(), orders.end());
}

void MmarSpec::validate() const {
  if (m < 1 || n < 1) throw InvalidParameter("spec: m and n must be positive");
  if (orders.empty()) throw InvalidParameter("spec: K must be at least 1");
  for (int p : orders)
    if (p < 1) throw InvalidParameter("spec: every AR order must be at least 1");
}

MmarSpec MmarSpec::uniform(Index m, Index n, int K, int p) {
  MmarSpec s;
  s.m = m;
  s.n = n;
  s.orders.assign(static_cast<std::size_t>(std::max(K, 0)), p);
  return s;
}

void MmarModel::validate() const {
  spec.validate();
  const auto K = static_cast<std::size_t>(spec.K());
  if (components.size() != K || alphas.size() != K)
    throw DimensionError("model: number of components/weights does not match spec");
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& c = components[k];
    const auto p = static_cast<std::size_t>(spec.orders[k]);
    if (c.A.size() != p || c.B.size() != p)
      throw DimensionError("model: component " + std::to_string(k + 1) +
                           " has the wrong number of lag matrices");
    for (std::size_t i = 0; i < p; ++i) {
      if (c.A[i].rows() != spec.m || c.A[i].cols() != spec.m)
        throw DimensionError("model: A has the wrong shape");
      if (c.B[i].rows() != spec.n || c.B[i].cols() != spec.n)
        throw DimensionError("model: B has the wrong shape");
      if (!c.A[i].allFinite() || !c.B[i].allFinite())
        throw InvalidParameter("model: non-finite coefficient matrix");
    }
    if (c.C.rows() != spec.m || c.C.cols() != spec.n)
      throw DimensionError("model: C has the wrong shape");
    if (c.U.rows() != spec.m || c.U.cols() != spec.m)
      throw DimensionError("model: U has the wrong shape");
    if (c.V.rows() != spec.n || c.V.cols() != spec.n)
      throw DimensionError("model: V has the wrong shape");
    if (!c.C.allFinite()) throw InvalidParameter("model: non-finite intercept");
    SpdMatrix{c.U};
    SpdMatrix{c.V};
    if (!(alphas[k] > 0.0 && alphas[k] < 1.0) && K > 1)
      throw InvalidParameter("model: mixing weights must lie in (0,1)");
    total += alphas[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidParameter("model: mixing weights must sum to 1");
}

MatrixSeries::MatrixSeries(Index m, Index n, Matrix stacked) : m_(m), n_(n), stacked_(std::move(stacked)) {
  if (m < 1 || n < 1 || stacked_.rows() != m * n)
    throw DimensionError("MatrixSeries: stacked matrix must have m*n rows");
  if (!stacked_.allFinite()) throw DataError("MatrixSeries: non-finite observation");
}

MatrixSeries::MatrixSeries(Index m, Index n, const std::vector<Matrix>& observations)
    : m_(m), n_(n), stacked_(m * n, static_cast<Index>(observations.size())) {
  for (std::size_t t = 0; t < observations.size(); ++t) {
    const auto& y = observations[t];
    if (y.rows() != m || y.cols() != n)
      throw DimensionError("MatrixSeries: observation " + std::to_string(t + 1) + " has the wrong shape");
    stacked_.col(static_cast<Index>(t)) = vec(y);
  }
  if (!stacked_.allFinite()) throw DataError("MatrixSeries: non-finite observation");
}

MatrixSeries MatrixSeries::slice(Index first, Index count) const {
  if (first < 0 || count < 0 || first + count > length())
    throw DimensionError("MatrixSeries::slice: range out of bounds");
  return MatrixSeries(m_, n_, Matrix(stacked_.middleCols(first, count)));
}

ComponentEval::ComponentEval(const MmarComponent& comp, Index m, Index n)
    : comp_(comp), u_(comp.U), v_(comp.V), u_inv_(u_.inverse()), v_inv_(v_.inverse()) {
  const auto md = static_cast<double>(m);
  const auto nd = static_cast<double>(n);
  log_const_ = -0.5 * md * nd * kLog2Pi - 0.5 * md * v_.log_det() - 0.5 * nd * u_.log_det();
}

std::vector<ComponentEval> make_evals(const MmarModel& model) {
  std::vector<ComponentEval> evals;
  evals.reserve(model.components.size());
  for (const auto& c : model.components) evals.emplace_back(c, model.spec.m, model.spec.n);
  return evals;
}

double log_sum_exp(std::span<const double> x) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

MmarModel normalize(const MmarModel& model) {
  model.validate();
  MmarModel out = model;
  for (auto& c : out.components) {
    for (std::size_t i = 0; i < c.B.size(); ++i) {
      const double s = c.B[i].norm();
      if (!(s > 0.0)) throw InvalidParameter("normalize: coefficient matrix B is zero");
      c.B[i] /= s;
      c.A[i] *= s;
      // Sign: first nonzero entry of vec(B) positive.
      const double* b = c.B[i].data();
      for (Index j = 0; j < c.B[i].size(); ++j) {
        if (b[j] != 0.0) {
          if (b[j] < 0.0) {
            c.B[i] = -c.B[i];
            c.A[i] = -c.A[i];
          }
          break;
        }
      }
    }
    const Matrix v_inv = SpdMatrix(c.V).inverse();
    const double r = vech(v_inv).norm();
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidParameter("normalize: V is singular");
    c.V *= r;
    c.U /= r;
  }

  const double total = std::accumulate(out.alphas.begin(), out.alphas.end(), 0.0);
  for (double& a : out.alphas) a /= total;

  const auto K = out.components.size();
  std::vector<std::size_t> idx(K);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<Vector> keys;
  keys.reserve(K);
  for (std::size_t k = 0; k < K; ++k)
    keys.push_back(pack_component_gamma(out.components[k], out.spec.m, out.spec.n));
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (out.alphas[a] != out.alphas[b]) return out.alphas[a] < out.alphas[b];
    return std::lexicographical_compare(keys[a].begin(), keys[a].end(), keys[b].begin(), keys[b].end());
  });
  MmarModel sorted = out;
  for (std::size_t k = 0; k < K; ++k) {
    sorted.components[k] = out.components[idx[k]];
    sorted.alphas[k] = out.alphas[idx[k]];
    sorted.spec.orders[k] = out.spec.orders[idx[k]];
  }
  return sorted;
}

Matrix companion_matrix(const MmarModel& model, int k) {
  if (k < 0 || k >= model.spec.K()) throw DimensionError("companion_matrix: component index out of range");
  const Index mn = model.spec.mn();
  const int p = model.spec.p_max();
  Matrix phi = Matrix::Zero(mn * p, mn * p);
  const auto& c = model.components[static_cast<std::size_t>(k)];
  for (std::size_t i = 0; i < c.A.size(); ++i)
    phi.block(0, static_cast<Index>(i) * mn, mn, mn) = kron(c.B[i], c.A[i]);
  for (int i = 1; i < p; ++i) phi.block(i * mn, (i - 1) * mn, mn, mn).setIdentity();
  return phi;
}

namespace {

DensityValue mix(const MmarModel& model, std::vector<double> logs) {
  DensityValue out;
  std::vector<double> weighted(logs.size());
  for (std::size_t k = 0; k < logs.size(); ++k) weighted[k] = std::log(model.alphas[k]) + logs[k];
  out.mixture = log_sum_exp(weighted);
  out.component_logs = std::move(logs);
  return out;
}

}  // namespace

DensityValue conditional_log_density(const MmarModel& model, std::span<const Matrix> window) {
  const int p = model.spec.p_max();
  if (static_cast<int>(window.size()) != p + 1)
    throw DimensionError("conditional_log_density: window must hold p_max + 1 observations");
  for (const auto& y : window)
    if (y.rows() != model.spec.m || y.cols() != model.spec.n)
      throw DimensionError("conditional_log_density: observation has the wrong shape");
  const auto evals = make_evals(model);
  const Matrix& current = window.back();
  std::vector<double> logs;
  logs.reserve(evals.size());
  for (const auto& e : evals) {
    const Matrix mu = e.mean([&](int i) -> const Matrix& { return window[window.size() - 1 - static_cast<std::size_t>(i)]; });
    logs.push_back(e.log_density_of_residual(current - mu));
  }
  return mix(model, std::move(logs));
}

DensityValue conditional_log_density(const MmarModel& model, const std::vector<ComponentEval>& evals,
                                     const MatrixSeries& data, Index t) {
  if (t < model.spec.p_max() || t >= data.length())
    throw DimensionError("conditional_log_density: time index has no complete window");
  std::vector<double> logs;
  logs.reserve(evals.size());
  const Matrix y = data.at(t);
  for (const auto& e : evals) logs.push_back(e.log_density_of_residual(y - e.mean_at(data, t)));
  return mix(model, std::move(logs));
}

std::vector<ConstrainedVar> to_constrained_var(const MmarModel& model) {
  std::vector<ConstrainedVar> out;
  for (const auto& c : model.components) {
    ConstrainedVar v;
    v.psi0 = vec(c.C);
    for (std::size_t i = 0; i < c.A.size(); ++i) v.psi.push_back(kron(c.B[i], c.A[i]));
    v.omega = kron(c.V, c.U);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::string> distinctness_warnings(const MmarModel& model, double tol) {
  std::vector<std::string> out;
  const auto K = model.components.size();
  std::vector<Vector> keys;
  for (const auto& c : model.components) keys.push_back(pack_component_gamma(c, model.spec.m, model.spec.n));
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = a + 1; b < K; ++b)
      if (keys[a].size() == keys[b].size() && (keys[a] - keys[b]).norm() < tol)
        out.push_back("components " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                      " are indistinguishable (parameter distance below " + std::to_string(tol) + ")");
  return out;
}

}  // namespace mmar
