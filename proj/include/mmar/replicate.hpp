#pragma once

// Monte-Carlo replication harness: simulate -> fit -> infer/select cycles
// over independent realizations with sub-seeds derived from one seed.

#include <cstdint>
#include <string>
#include <vector>

#include "mmar/estimate.hpp"
#include "mmar/selection.hpp"

namespace mmar {

struct CoverageResult {
  int reps = 0;
  int failed = 0;
  double level = 0.95;
  // Element-wise CI coverage of every A_{k,i} block, keyed like "A[1,1]".
  std::vector<std::string> block_names;
  std::vector<double> block_coverage;
  double a11_coverage = 0.0;         // entries of A_{1,1}
  std::vector<double> xi_coverage;   // joint ellipse of xi_k, k = 1..K
  double xi_all_coverage = 0.0;      // (xi_1, ..., xi_K)
  double mean_coverage = 0.0;        // all theta entries
  std::vector<std::string> failures;
};

// fit_em initialized at the truth on each replicate.
CoverageResult coverage_experiment(const MmarModel& truth, Index T, int reps, std::uint64_t seed,
                                   double level = 0.95, const EmOptions& opts = {}, int burn_in = 500);

struct SelectionRates {
  int reps = 0;
  int failed = 0;
  std::vector<std::string> criteria;  // AIC, BIC, HQ, GIC
  std::vector<double> correct_rate;   // fraction selecting the true K
  std::vector<double> joint_rate;     // true K and true p
  std::vector<std::vector<int>> picks;    // per criterion, per rep: selected K (0 on failure)
  std::vector<std::vector<int>> p_picks;  // selected p
  std::vector<std::string> failures;
  bool stepwise = false;
};

// Grid over Ks with the true equal order p; every criterion read off the
// same fits.
SelectionRates selection_experiment(const MmarModel& truth, Index T, int reps, std::uint64_t seed,
                                    const std::vector<int>& Ks, const EmOptions& opts = {}, int burn_in = 500);

// Stepwise selection per criterion (K with p = 1, then p with that K).
// Correct means the selected K equals the true K.
SelectionRates stepwise_experiment(const MmarModel& truth, Index T, int reps, std::uint64_t seed,
                                   const std::vector<int>& Ks, const std::vector<int>& ps,
                                   const EmOptions& opts = {}, int burn_in = 500);

}  // namespace mmar
