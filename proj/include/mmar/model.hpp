#pragma once

// The mixture matrix autoregressive model: K components, each
//   Y_t = C_k + sum_{i=1}^{p_k} A_{k,i} Y_{t-i} B_{k,i}^T + E_t,
//   E_t ~ MN(0, U_k, V_k),
// selected independently at every step with probability alpha_k.

#include <span>
#include <string>
#include <vector>

#include "mmar/linalg.hpp"

namespace mmar {

struct MmarSpec {
  Index m = 1;  // rows of Y_t
  Index n = 1;  // cols of Y_t
  std::vector<int> orders;  // p_1..p_K

  int K() const { return static_cast<int>(orders.size()); }
  int p_max() const;
  Index mn() const { return m * n; }
  void validate() const;

  // Equal-order spec: K components of order p.
  static MmarSpec uniform(Index m, Index n, int K, int p);
  bool operator==(const MmarSpec&) const = default;
};

struct MmarComponent {
  std::vector<Matrix> A;  // p_k matrices, m x m
  std::vector<Matrix> B;  // p_k matrices, n x n
  Matrix C;               // m x n
  Matrix U;               // m x m, SPD
  Matrix V;               // n x n, SPD
};

struct MmarModel {
  MmarSpec spec;
  std::vector<MmarComponent> components;
  std::vector<double> alphas;

  // Shapes, finiteness, SPD scales, weights in (0,1) summing to 1.
  void validate() const;
};

// Ordered sequence Y_1..Y_T of m x n observations, held as the mn x T matrix
// whose t-th column is vec(Y_t). Indices are zero-based.
class MatrixSeries {
 public:
  MatrixSeries() = default;
  MatrixSeries(Index m, Index n, Matrix stacked);
  MatrixSeries(Index m, Index n, const std::vector<Matrix>& observations);

  Index rows() const { return m_; }
  Index cols() const { return n_; }
  Index length() const { return stacked_.cols(); }
  Eigen::Map<const Matrix> at(Index t) const {
    return Eigen::Map<const Matrix>(stacked_.col(t).data(), m_, n_);
  }
  const Matrix& stacked() const { return stacked_; }
  // Observations [first, first + count) as a new series.
  MatrixSeries slice(Index first, Index count) const;

 private:
  Index m_ = 0;
  Index n_ = 0;
  Matrix stacked_;
};

// Precomputed evaluation state of one component: Cholesky factors and
// inverses of U and V and the log normalizing constant. Every density and
// score evaluation in the library goes through this type.
class ComponentEval {
 public:
  ComponentEval(const MmarComponent& comp, Index m, Index n);

  const MmarComponent& component() const { return comp_; }
  int order() const { return static_cast<int>(comp_.A.size()); }
  const SpdMatrix& u() const { return u_; }
  const SpdMatrix& v() const { return v_; }
  const Matrix& u_inv() const { return u_inv_; }
  const Matrix& v_inv() const { return v_inv_; }
  // -mn/2 log(2 pi) - m/2 log det V - n/2 log det U
  double log_const() const { return log_const_; }

  // C + sum_i A_i lag(i) B_i^T where lag(i) is Y_{t-i}.
  template <class LagFn>
  Matrix mean(LagFn&& lag) const {
    Matrix mu = comp_.C;
    for (int i = 0; i < order(); ++i) mu.noalias() += comp_.A[i] * lag(i + 1) * comp_.B[i].transpose();
    return mu;
  }
  Matrix mean_at(const MatrixSeries& data, Index t) const {
    return mean([&](int i) { return data.at(t - i); });
  }

  double log_density_of_residual(const Matrix& resid) const {
    return log_const_ - 0.5 * whiten(resid, u_, v_).squaredNorm();
  }

 private:
  MmarComponent comp_;
  SpdMatrix u_;
  SpdMatrix v_;
  Matrix u_inv_;
  Matrix v_inv_;
  double log_const_;
};

std::vector<ComponentEval> make_evals(const MmarModel& model);

// Identifiability normalization: unit-Frobenius B with positive leading
// nonzero entry (compensated in A), unit-norm vech(V^{-1}) (compensated in
// U), components ordered by ascending weight. Density-preserving.
MmarModel normalize(const MmarModel& model);

// Block companion matrix of component k (zero-based), (mn p_max) square.
Matrix companion_matrix(const MmarModel& model, int k);

struct DensityValue {
  double mixture = 0.0;                 // log sum_k alpha_k f_k
  std::vector<double> component_logs;   // log f_k
};

// Window is chronological: window[0..p_max-1] are the lags Y_{t-p_max}..Y_{t-1}
// and window.back() is Y_t.
DensityValue conditional_log_density(const MmarModel& model, std::span<const Matrix> window);
DensityValue conditional_log_density(const MmarModel& model,
                                     const std::vector<ComponentEval>& evals,
                                     const MatrixSeries& data, Index t);

struct ConstrainedVar {
  Vector psi0;               // vec(C_k)
  std::vector<Matrix> psi;   // B_{k,i} (x) A_{k,i}
  Matrix omega;              // V_k (x) U_k
};
std::vector<ConstrainedVar> to_constrained_var(const MmarModel& model);

// Numerically stable log(sum exp(x)).
double log_sum_exp(std::span<const double> x);

// Warn when two components are within tol in packed-parameter distance.
std::vector<std::string> distinctness_warnings(const MmarModel& model, double tol = 1e-8);

}  // namespace mmar
