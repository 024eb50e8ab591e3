#include "mmar/forecast.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>

#include "mmar/error.hpp"
#include "mmar/estimate.hpp"

namespace mmar {

namespace {

void check_lags(const MmarModel& model, std::span<const Matrix> lags) {
  if (static_cast<int>(lags.size()) != model.spec.p_max())
    throw DimensionError("forecast: window must hold exactly p_max lags");
  for (const auto& y : lags)
    if (y.rows() != model.spec.m || y.cols() != model.spec.n)
      throw DimensionError("forecast: lag observation has the wrong shape");
}

Matrix component_mean(const ComponentEval& e, std::span<const Matrix> lags) {
  return e.mean([&](int i) -> const Matrix& { return lags[lags.size() - static_cast<std::size_t>(i)]; });
}

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double mixture_pdf(const PredictiveMarginal& pm, double x) {
  double f = 0.0;
  for (std::size_t k = 0; k < pm.weights.size(); ++k) {
    const double z = (x - pm.means[k]) / pm.sds[k];
    f += pm.weights[k] * kInvSqrt2Pi / pm.sds[k] * std::exp(-0.5 * z * z);
  }
  return f;
}

double mixture_mass(const PredictiveMarginal& pm, double lo, double hi) {
  double p = 0.0;
  for (std::size_t k = 0; k < pm.weights.size(); ++k) {
    const boost::math::normal_distribution<double> nd(pm.means[k], pm.sds[k]);
    p += pm.weights[k] * (boost::math::cdf(nd, hi) - boost::math::cdf(nd, lo));
  }
  return p;
}

// Super-level set {density >= c} from grid runs, endpoints interpolated.
std::vector<HdrInterval> level_set(const PredictiveMarginal& pm, double c) {
  std::vector<HdrInterval> out;
  const Index g = pm.grid.size();
  auto cross = [&](Index a, Index b) {
    const double fa = pm.density(a) - c;
    const double fb = pm.density(b) - c;
    if (fa == fb) return 0.5 * (pm.grid(a) + pm.grid(b));
    return pm.grid(a) + (pm.grid(b) - pm.grid(a)) * fa / (fa - fb);
  };
  Index i = 0;
  while (i < g) {
    if (pm.density(i) < c) {
      ++i;
      continue;
    }
    HdrInterval iv;
    iv.lo = i == 0 ? pm.grid(0) : cross(i - 1, i);
    Index j = i;
    while (j + 1 < g && pm.density(j + 1) >= c) ++j;
    iv.hi = j + 1 == g ? pm.grid(g - 1) : cross(j, j + 1);
    out.push_back(iv);
    i = j + 1;
  }
  return out;
}

double set_mass(const PredictiveMarginal& pm, const std::vector<HdrInterval>& set) {
  double p = 0.0;
  for (const auto& iv : set) p += mixture_mass(pm, iv.lo, iv.hi);
  return p;
}

}  // namespace

Matrix conditional_mean(const MmarModel& model, std::span<const Matrix> lags) {
  model.validate();
  check_lags(model, lags);
  const auto evals = make_evals(model);
  Matrix out = Matrix::Zero(model.spec.m, model.spec.n);
  for (std::size_t k = 0; k < evals.size(); ++k) out += model.alphas[k] * component_mean(evals[k], lags);
  return out;
}

PredictiveMarginal mixture_hdr(const std::vector<double>& weights, const std::vector<double>& means,
                               const std::vector<double>& sds, double level, int grid_size) {
  if (weights.empty() || weights.size() != means.size() || weights.size() != sds.size())
    throw DimensionError("mixture_hdr: weights, means and sds must have equal non-zero length");
  if (!(level > 0.0 && level <= 1.0)) throw InvalidParameter("mixture_hdr: level must lie in (0,1]");
  if (grid_size < 3) throw InvalidParameter("mixture_hdr: grid needs at least 3 points");
  for (double s : sds)
    if (!(s > 0.0)) throw InvalidParameter("mixture_hdr: standard deviations must be positive");
  PredictiveMarginal pm;
  pm.weights = weights;
  pm.means = means;
  pm.sds = sds;
  pm.level = level;
  double lo = means[0] - 6.0 * sds[0];
  double hi = means[0] + 6.0 * sds[0];
  for (std::size_t k = 1; k < means.size(); ++k) {
    lo = std::min(lo, means[k] - 6.0 * sds[k]);
    hi = std::max(hi, means[k] + 6.0 * sds[k]);
  }
  pm.grid = Vector::LinSpaced(grid_size, lo, hi);
  pm.density.resize(grid_size);
  for (Index i = 0; i < grid_size; ++i) pm.density(i) = mixture_pdf(pm, pm.grid(i));

  if (level >= 1.0) {
    pm.threshold = 0.0;
    pm.hdr = {{lo, hi}};
    pm.hdr_mass = mixture_mass(pm, lo, hi);
    return pm;
  }
  // mass({f >= c}) is non-increasing in c: keep `a` feasible, `b` infeasible.
  double a = 0.0;
  double b = pm.density.maxCoeff();
  for (int it = 0; it < 200 && b - a > 1e-15 * pm.density.maxCoeff(); ++it) {
    const double c = 0.5 * (a + b);
    if (set_mass(pm, level_set(pm, c)) >= level)
      a = c;
    else
      b = c;
  }
  pm.threshold = a;
  pm.hdr = level_set(pm, a);
  pm.hdr_mass = set_mass(pm, pm.hdr);
  return pm;
}

PredictiveMarginal predictive_marginal(const MmarModel& model, std::span<const Matrix> lags, Index row, Index col,
                                       double level, int grid_size) {
  model.validate();
  check_lags(model, lags);
  if (row < 0 || row >= model.spec.m || col < 0 || col >= model.spec.n)
    throw DimensionError("predictive_marginal: cell out of range");
  const auto evals = make_evals(model);
  std::vector<double> means;
  std::vector<double> sds;
  for (const auto& e : evals) {
    means.push_back(component_mean(e, lags)(row, col));
    sds.push_back(std::sqrt(e.component().U(row, row) * e.component().V(col, col)));
  }
  PredictiveMarginal pm = mixture_hdr(model.alphas, means, sds, level, grid_size);
  pm.row = row;
  pm.col = col;
  return pm;
}

Residuals residuals(const MmarModel& model, const MatrixSeries& data) {
  const Design d(data, model.spec.p_max());
  const EStep es = e_step(model, d);
  const auto evals = make_evals(model);
  const Index N = d.targets();
  Matrix out(d.mn(), N);
  Residuals r;
  r.labels.resize(static_cast<std::size_t>(N));
  for (Index j = 0; j < N; ++j) {
    Index best = 0;
    for (Index k = 1; k < es.tau.cols(); ++k)
      if (es.tau(j, k) > es.tau(j, best)) best = k;
    const Index t = d.p_max() + j;
    out.col(j) = vec(Matrix(data.at(t)) - evals[static_cast<std::size_t>(best)].mean_at(data, t));
    r.labels[static_cast<std::size_t>(j)] = static_cast<int>(best) + 1;
  }
  r.residuals = MatrixSeries(d.m(), d.n(), std::move(out));
  return r;
}

MatrixSeries standardized_residuals(const MmarModel& model, const MatrixSeries& data) {
  const Residuals r = residuals(model, data);
  const auto evals = make_evals(model);
  Matrix out(data.rows() * data.cols(), r.residuals.length());
  for (Index j = 0; j < r.residuals.length(); ++j) {
    const auto& e = evals[static_cast<std::size_t>(r.labels[static_cast<std::size_t>(j)] - 1)];
    out.col(j) = vec(whiten(r.residuals.at(j), e.u(), e.v()));
  }
  return MatrixSeries(data.rows(), data.cols(), std::move(out));
}

double mspe(const std::vector<Matrix>& forecasts, const std::vector<Matrix>& actuals) {
  if (forecasts.size() != actuals.size()) throw DimensionError("mspe: forecasts and actuals differ in length");
  if (forecasts.empty()) throw DimensionError("mspe: no forecasts");
  double s = 0.0;
  for (std::size_t t = 0; t < forecasts.size(); ++t) {
    if (forecasts[t].rows() != actuals[t].rows() || forecasts[t].cols() != actuals[t].cols())
      throw DimensionError("mspe: forecast and actual differ in shape at step " + std::to_string(t + 1));
    s += (actuals[t] - forecasts[t]).squaredNorm();
  }
  return s / static_cast<double>(forecasts.size());
}

}  // namespace mmar
