#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmar/model.hpp"
#include "mmar/rng.hpp"

namespace mmar {

struct SimulationResult {
  MatrixSeries series;
  std::vector<int> labels;  // component of each observation, 1..K
  std::uint64_t seed = 0;
  int burn_in = 0;
  std::string rng;
};

inline constexpr int kDefaultBurnIn = 500;

// M + L_U Z L_V^T with Z i.i.d. standard normal.
Matrix draw_matrix_normal(const Matrix& mean, const SpdMatrix& u, const SpdMatrix& v, Rng& rng);

// Zero initial lags, burn_in + T steps, burn-in discarded. Throws
// NumericalError naming the step when an entry exceeds 1e100 in magnitude.
SimulationResult simulate(const MmarModel& model, Index T, int burn_in, std::uint64_t seed);

// One draw of Y_t given the chronological lag window Y_{t-p_max}..Y_{t-1}.
// `label` receives the chosen component (1..K) when non-null.
Matrix draw_next(const MmarModel& model, const std::vector<ComponentEval>& evals,
                 std::span<const Matrix> lags, Rng& rng, int* label = nullptr);

// Index k with probability alphas[k].
int draw_component(const std::vector<double>& alphas, Rng& rng);

}  // namespace mmar
