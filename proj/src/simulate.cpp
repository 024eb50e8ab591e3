#include "mmar/simulate.hpp"

#include <cmath>

#include "mmar/error.hpp"

namespace mmar {

Matrix draw_matrix_normal(const Matrix& mean, const SpdMatrix& u, const SpdMatrix& v, Rng& rng) {
  if (mean.rows() != u.dim() || mean.cols() != v.dim())
    throw DimensionError("draw_matrix_normal: mean does not conform to scale matrices");
  const Matrix z = normal_matrix(mean.rows(), mean.cols(), rng);
  Matrix out = mean;
  out.noalias() += u.llt().matrixL() * z * v.llt().matrixL().transpose();
  return out;
}

int draw_component(const std::vector<double>& alphas, Rng& rng) {
  const double r = uniform01(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < alphas.size(); ++k) {
    acc += alphas[k];
    if (r < acc) return static_cast<int>(k);
  }
  return static_cast<int>(alphas.size()) - 1;
}

Matrix draw_next(const MmarModel& model, const std::vector<ComponentEval>& evals,
                 std::span<const Matrix> lags, Rng& rng, int* label) {
  if (static_cast<int>(lags.size()) != model.spec.p_max())
    throw DimensionError("draw_next: window must hold p_max lags");
  const int k = draw_component(model.alphas, rng);
  const auto& e = evals[static_cast<std::size_t>(k)];
  const Matrix mu = e.mean([&](int i) -> const Matrix& { return lags[lags.size() - static_cast<std::size_t>(i)]; });
  if (label) *label = k + 1;
  return draw_matrix_normal(mu, e.u(), e.v(), rng);
}

SimulationResult simulate(const MmarModel& model, Index T, int burn_in, std::uint64_t seed) {
  model.validate();
  if (T < 1) throw InvalidParameter("simulate: T must be positive");
  if (burn_in < 0) throw InvalidParameter("simulate: burn-in must be non-negative");
  const Index m = model.spec.m;
  const Index n = model.spec.n;
  const int p = model.spec.p_max();
  const auto evals = make_evals(model);
  Rng rng(seed);

  std::vector<Matrix> window(static_cast<std::size_t>(p), Matrix::Zero(m, n));
  Matrix stacked(m * n, T);
  std::vector<int> labels(static_cast<std::size_t>(T));
  const Index total = T + burn_in;
  for (Index step = 0; step < total; ++step) {
    int label = 0;
    Matrix y = draw_next(model, evals, window, rng, &label);
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > 1e100)
      throw NumericalError("simulate: trajectory diverged at step " + std::to_string(step + 1) +
                           " (entry magnitude above 1e100)");
    if (step >= burn_in) {
      stacked.col(step - burn_in) = vec(y);
      labels[static_cast<std::size_t>(step - burn_in)] = label;
    }
    if (p > 0) {
      window.erase(window.begin());
      window.push_back(std::move(y));
    }
  }
  SimulationResult out;
  out.series = MatrixSeries(m, n, std::move(stacked));
  out.labels = std::move(labels);
  out.seed = seed;
  out.burn_in = burn_in;
  out.rng = std::string(kRngName);
  return out;
}

}  // namespace mmar
