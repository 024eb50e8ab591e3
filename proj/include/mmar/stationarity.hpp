#pragma once

// Stationarity criteria for the mixture model, expressed through the block
// companion matrices Phi_k of the components.
//
//  mean:         rho(sum_k alpha_k Phi_k) < 1
//  second order: rho(sum_k alpha_k Phi_k (x) Phi_k) < 1 (given mean stationarity)
//  strict:       sum_k alpha_k log rho(Phi_k) < 0          (sufficient)
//  q-th moment:  sum_k alpha_k rho(Phi_k)^q < 1            (sufficient)
//
// The mean and second-order conditions are exact for order-one models. For
// higher orders the same tests are applied to the companion matrices, which
// the report flags as an extension.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmar/model.hpp"

namespace mmar {

struct CriterionValue {
  bool holds = false;
  double value = 0.0;
};

struct QthMoment {
  double q = 0.0;
  bool holds = false;
  double weighted = 0.0;    // sum_k alpha_k rho_k^q (the decision value)
  double unweighted = 0.0;  // sum_k rho_k^q, reported alongside
};

struct LyapunovEstimate {
  double gamma = 0.0;
  double se = 0.0;
  int horizon = 0;
  int replications = 0;
};

struct StationarityReport {
  std::vector<double> component_radii;  // rho(Phi_k)
  bool order_one = true;
  bool companion_extension = false;  // orders > 1: mean/second-order via companions
  CriterionValue mean;
  std::optional<CriterionValue> second_order;
  std::string second_order_note;
  CriterionValue strict;
  std::optional<double> strict_simplified;  // sum alpha_k log(rho(B_k) rho(A_k)), order one only
  std::vector<QthMoment> qth;
  std::optional<LyapunovEstimate> lyapunov;
};

CriterionValue check_mean_stationarity(const MmarModel& model);
// Throws InvalidParameter when (mn p_max)^2 exceeds row_cap.
CriterionValue check_second_order_stationarity(const MmarModel& model, Index row_cap = 10000);
// Value is -inf when some rho(Phi_k) = 0.
CriterionValue check_strict_sufficient(const MmarModel& model);
QthMoment check_qth_moment(const MmarModel& model, double q);

inline constexpr int kDefaultLyapunovHorizon = 2000;
inline constexpr int kDefaultLyapunovReplications = 200;

// Mean over replications of (1/horizon) log ||D_horizon ... D_1||_F with D_i
// drawn i.i.d. from {Phi_k} with probabilities alpha; the running product is
// rescaled to unit Frobenius norm after every factor.
LyapunovEstimate estimate_lyapunov(const MmarModel& model, int horizon, int replications,
                                   std::uint64_t seed);

struct StationarityOptions {
  std::vector<double> qs{2.0, 4.0, 6.0};
  Index row_cap = 10000;
  bool lyapunov = false;
  int horizon = kDefaultLyapunovHorizon;
  int replications = kDefaultLyapunovReplications;
  std::uint64_t seed = 0;
};

StationarityReport stationarity_report(const MmarModel& model, const StationarityOptions& opts = {});

}  // namespace mmar
