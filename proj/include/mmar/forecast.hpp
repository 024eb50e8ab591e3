#pragma once

#include <span>
#include <vector>

#include "mmar/model.hpp"

namespace mmar {

// sum_k alpha_k (C_k + sum_i A_{k,i} Y_{t-i} B_{k,i}^T); lags chronological,
// lags.back() = Y_{t-1}, exactly p_max of them.
Matrix conditional_mean(const MmarModel& model, std::span<const Matrix> lags);

struct HdrInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct PredictiveMarginal {
  Index row = 0;
  Index col = 0;
  std::vector<double> weights;  // mixture of K normals
  std::vector<double> means;
  std::vector<double> sds;
  Vector grid;
  Vector density;
  std::vector<HdrInterval> hdr;
  double level = 0.95;
  double threshold = 0.0;  // c*: hdr = {x : density(x) >= c*}
  double hdr_mass = 0.0;   // exact mixture probability of the hdr
};

inline constexpr int kDefaultGridSize = 2048;

// Density of a univariate normal mixture on a uniform grid spanning
// [min mu - 6 sd, max mu + 6 sd], and its highest density region at `level`.
// The largest threshold whose super-level set has probability >= level is
// found by bisection; interval endpoints come from linear interpolation of
// the density between grid points and the probability is evaluated with the
// normal CDFs.
PredictiveMarginal mixture_hdr(const std::vector<double>& weights, const std::vector<double>& means,
                               const std::vector<double>& sds, double level = 0.95,
                               int grid_size = kDefaultGridSize);

// One-step marginal predictive distribution of entry (row, col): component k
// contributes N(mu_k(row, col), U_k(row,row) V_k(col,col)).
PredictiveMarginal predictive_marginal(const MmarModel& model, std::span<const Matrix> lags, Index row, Index col,
                                       double level = 0.95, int grid_size = kDefaultGridSize);

struct Residuals {
  MatrixSeries residuals;   // one per target t = p_max+1..T
  std::vector<int> labels;  // argmax-responsibility component, 1..K (ties: lowest)
};

Residuals residuals(const MmarModel& model, const MatrixSeries& data);
// Residuals whitened by the assigned component: L_U^{-1} e_t L_V^{-T}.
MatrixSeries standardized_residuals(const MmarModel& model, const MatrixSeries& data);

// Mean over time of ||Y_t - Yhat_t||_F^2.
double mspe(const std::vector<Matrix>& forecasts, const std::vector<Matrix>& actuals);

}  // namespace mmar
