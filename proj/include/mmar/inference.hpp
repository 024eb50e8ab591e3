#pragma once

// Scores, observed information and Wald-type inference on theta.
//
// Scores are analytic in the unconstrained gamma parameterization and mapped
// to theta with the reconstruction Jacobian. The information matrix is the
// symmetrized central-difference Jacobian of the total analytic score;
// second derivatives are never hand-coded.

#include <string>
#include <vector>

#include "mmar/estimate.hpp"
#include "mmar/theta.hpp"

namespace mmar {

// Per-observation gradient of l_t in gamma; t is the zero-based time index,
// p_max <= t < T.
Vector score_gamma(const MmarModel& model, const MatrixSeries& data, Index t);
// Same in theta. Throws InvalidParameter at a boundary theta.
Vector score_theta(const MmarModel& model, const MatrixSeries& data, Index t);

// sum_t of the above, computed from batched residuals.
Vector total_score_gamma(const MmarModel& model, const MatrixSeries& data);
Vector total_score_theta(const MmarModel& model, const MatrixSeries& data);

enum class InfoMethod { numeric_hessian, outer_product };

struct Information {
  Matrix total;  // estimate of sum_t E(-l''_t), symmetric
  bool projected = false;
  std::vector<std::string> warnings;
};

// Requires a normalized model (pack_theta must succeed).
Information observed_information(const MmarModel& model, const MatrixSeries& data,
                                 InfoMethod method = InfoMethod::numeric_hessian);

struct InferenceReport {
  ThetaVector theta_hat;
  Matrix covariance;        // covariance of theta_hat: inverse total information
  Vector standard_errors;   // sqrt(diag(covariance))
  Vector gamma_standard_errors;  // delta method through d gamma / d theta
  double last_alpha_se = 0.0;    // alpha_K = 1 - sum of the others
  InfoMethod method = InfoMethod::numeric_hessian;
  bool projected = false;
  Index n_obs = 0;  // T - p_max
  std::vector<std::string> warnings;
};

InferenceReport infer(const MmarModel& model, const MatrixSeries& data,
                      InfoMethod method = InfoMethod::numeric_hessian);

double normal_quantile(double p);
double chi2_quantile(double df, double p);

struct WaldInterval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  char mark = '0';  // '+' / '-' when significant at 5%, '0' otherwise
};

std::vector<WaldInterval> wald_intervals(const InferenceReport& report, double level = 0.95);
// Same for every gamma entry (includes the reconstructed ones).
std::vector<WaldInterval> gamma_wald_intervals(const InferenceReport& report, double level = 0.95);

// (theta_hat - theta_true)_xi' Cov_xi^{-1} (...)_xi <= chi2_{|xi|}(level).
bool joint_ellipse_test(const InferenceReport& report, const std::vector<Index>& xi, double level,
                        const Vector& theta_true);

}  // namespace mmar
