#pragma once

// Maximum-likelihood estimation by EM.
//
// Every step works from weighted moment matrices of the regression design
//   z_t = [1; vec Y_t; vec Y_{t-1}; ...; vec Y_{t-p_max}],  t = p_max+1..T,
// so one pass over the data per component and iteration (the weighted Gram
// W_k = sum_t tau_{t,k} z_t z_t^T) is all the M-step needs. The closed-form
// block updates for A, B, C, U and V are then small dense solves on W_k.

#include <cstdint>
#include <string>
#include <vector>

#include "mmar/model.hpp"

namespace mmar {

struct EmOptions {
  int max_em_iters = 1000;
  double em_rel_tol = 1e-8;  // on |dL| / (1 + |L|)
  int max_inner_iters = 50;
  double inner_rel_tol = 1e-8;
  double ridge_jitter = 1e-8;  // diagonal ridge, relative to trace/dim of the Gram block
  int n_starts = 0;            // 0: one start per scalar series, m*n in total
  int univariate_starts = 3;   // random restarts of each scalar mixture fit
  // A component whose V (x) U has a larger condition number is treated as a
  // collapse onto a few points (a spurious maximizer) and the fit is abandoned.
  double max_condition = 1e12;
  std::uint64_t seed = 0;
  bool parallel = true;

  void validate() const;
};

// (T - p_max) x K, row t holds tau_{t,k}.
using ResponsibilityMatrix = Matrix;

struct FitReport {
  MmarModel model;  // normalized
  double loglik = 0.0;
  std::vector<double> loglik_trace;  // trace[0] is the initial value
  ResponsibilityMatrix responsibilities;
  bool converged = false;
  int n_iters = 0;
  int start_index = 0;
  std::vector<double> start_logliks;  // multistart only; NaN marks a failed start
  std::vector<std::string> flags;     // clipping, jitter, component restarts, warnings
};

// Regression design for a fixed p_max. Column j belongs to target time
// t = p_max + j (zero-based).
class Design {
 public:
  Design(const MatrixSeries& data, int p_max);

  Index m() const { return m_; }
  Index n() const { return n_; }
  Index mn() const { return m_ * n_; }
  int p_max() const { return p_; }
  Index targets() const { return z_.cols(); }
  Index dim() const { return z_.rows(); }
  const Matrix& z() const { return z_; }
  // Offset of block b in z_t: 0 is vec Y_t, b >= 1 is vec Y_{t-b}.
  Index offset(int b) const { return 1 + mn() * b; }
  // Root mean square of the observations; sets the eigenvalue floors.
  double scale() const { return scale_; }

 private:
  Index m_, n_;
  int p_;
  Matrix z_;
  double scale_;
};

// Residual matrix (mn x targets) of one component: column j is vec(eps_t).
Matrix component_residuals(const MmarComponent& comp, const Design& design);

struct EStep {
  ResponsibilityMatrix tau;
  Vector point_logliks;  // l_t
  double loglik = 0.0;
};

EStep e_step(const MmarModel& model, const Design& design);
ResponsibilityMatrix e_step(const MmarModel& model, const MatrixSeries& data);
// Conditional log-likelihood sum_{t > p_max} l_t. Throws DimensionError when
// T <= p_max.
double log_likelihood(const MmarModel& model, const MatrixSeries& data);

// ---- M-step pieces --------------------------------------------------------

struct MStepLog {
  std::vector<std::string> flags;
  int inner_iters = 0;
};

// Expected complete-data log-likelihood of one component given its weighted
// Gram matrix W = sum_t w_t z_t z_t^T.
double component_objective(const MmarComponent& comp, double alpha, const Matrix& gram,
                           const Design& design);

enum class Block { A, B, C, U, V };

// Closed-form maximizer of the component objective in one block, all other
// blocks held at their current values.
void update_block(Block block, MmarComponent& comp, const Matrix& gram, const Design& design,
                  const EmOptions& opts, MStepLog* log = nullptr);

// Cycles A, B, C, U, V until the objective's relative change falls below
// inner_rel_tol. Returns the final objective (alpha term excluded).
double update_component(MmarComponent& comp, const Matrix& gram, const Design& design,
                        const EmOptions& opts, MStepLog* log = nullptr);

Matrix weighted_gram(const Design& design, const Eigen::Ref<const Vector>& weights);

// Full M-step: alpha in closed form, then update_component for every
// component. The result is not normalized.
MmarModel m_step(const MmarModel& model, const Design& design, const ResponsibilityMatrix& tau,
                 const EmOptions& opts, MStepLog* log = nullptr);
MmarModel m_step(const MmarModel& model, const MatrixSeries& data, const ResponsibilityMatrix& tau,
                 const EmOptions& opts = {});

// ---- drivers ----------------------------------------------------------------

// Throws NumericalError when a component degenerates (see max_condition).
FitReport fit_em(const MatrixSeries& data, const MmarModel& init, const EmOptions& opts = {});

// cond(U) * cond(V), the condition number of the component's vec covariance.
double covariance_condition(const MmarComponent& comp);

struct InitialValues {
  std::vector<MmarModel> candidates;
  std::vector<int> series;  // scalar series each candidate came from (-1: K = 1 fit)
  std::vector<std::string> warnings;
};

InitialValues initial_values(const MatrixSeries& data, const MmarSpec& spec, const EmOptions& opts);

// Runs fit_em from every initial-value candidate and keeps the highest
// log-likelihood (lowest start index on ties). Throws NumericalError when
// every start fails.
FitReport fit_multistart(const MatrixSeries& data, const MmarSpec& spec, const EmOptions& opts = {});

// Single-component MAR maximum likelihood with fixed observation weights.
MmarComponent fit_weighted_mar(const Design& design, const Vector& weights, int order, const EmOptions& opts,
                               MStepLog* log = nullptr);

}  // namespace mmar
