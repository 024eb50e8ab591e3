#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmar/estimate.hpp"

namespace mmar {

struct Criteria {
  double aic = 0.0;
  double bic = 0.0;
  double hq = 0.0;
  double gic = 0.0;
};

enum class Criterion { aic, bic, hq, gic };

Criterion parse_criterion(const std::string& name);
std::string criterion_name(Criterion c);
double criterion_value(const Criteria& c, Criterion which);

// With N = T - p_max:
//   AIC = -2L + 2 dim          BIC = -2L + log(N) dim
//   HQ  = -2L + 2 log(log N) dim
//   GIC = -2L + log(log N) log(dim) dim
// Throws InvalidParameter when N < 3.
Criteria criteria(double loglik, Index dim, Index T, int p_max);

struct SelectionRow {
  int K = 0;
  int p = 0;
  Index dim = 0;
  bool ok = false;
  double loglik = 0.0;
  Criteria crit;
  std::string status;  // "ok" or the failure message
};

struct SelectionResult {
  std::vector<SelectionRow> table;
  int winner = -1;  // row index
  std::optional<FitReport> winner_fit;
  int n_fits = 0;
};

// Index of the best ok row under `which`; ties go to the smaller dim(Theta),
// then to the earlier row. -1 when no row is ok.
int select_winner(const std::vector<SelectionRow>& rows, Criterion which);

// Fits every equal-order model (K, p) with fit_multistart. Throws
// NumericalError when every fit fails.
SelectionResult select_grid(const MatrixSeries& data, const std::vector<int>& Ks, const std::vector<int>& ps,
                            Criterion which, const EmOptions& opts);

// Stage 1 selects K with p = 1 (or the smallest p when 1 is not in range);
// stage 2 selects p with that K. Fits shared between the stages are reused.
SelectionResult select_stepwise(const MatrixSeries& data, const std::vector<int>& Ks, const std::vector<int>& ps,
                                Criterion which, const EmOptions& opts);

}  // namespace mmar
