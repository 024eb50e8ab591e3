#include "mmar/stationarity.hpp"

#include <cmath>
#include <limits>

#include "mmar/error.hpp"
#include "mmar/parallel.hpp"
#include "mmar/rng.hpp"
#include "mmar/simulate.hpp"

namespace mmar {

namespace {

bool all_order_one(const MmarModel& model) {
  for (int p : model.spec.orders)
    if (p != 1) return false;
  return true;
}

std::vector<double> radii(const MmarModel& model) {
  std::vector<double> r;
  for (int k = 0; k < model.spec.K(); ++k) r.push_back(spectral_radius(companion_matrix(model, k)));
  return r;
}

}  // namespace

CriterionValue check_mean_stationarity(const MmarModel& model) {
  model.validate();
  const Index d = model.spec.mn() * model.spec.p_max();
  Matrix sum = Matrix::Zero(d, d);
  for (int k = 0; k < model.spec.K(); ++k)
    sum += model.alphas[static_cast<std::size_t>(k)] * companion_matrix(model, k);
  const double rho = spectral_radius(sum);
  return {rho < 1.0, rho};
}

CriterionValue check_second_order_stationarity(const MmarModel& model, Index row_cap) {
  model.validate();
  const Index d = model.spec.mn() * model.spec.p_max();
  if (d * d > row_cap)
    throw InvalidParameter("second-order criterion needs a " + std::to_string(d * d) +
                           "-row matrix, above the cap of " + std::to_string(row_cap));
  Matrix sum = Matrix::Zero(d * d, d * d);
  for (int k = 0; k < model.spec.K(); ++k) {
    const Matrix phi = companion_matrix(model, k);
    sum += model.alphas[static_cast<std::size_t>(k)] * kron(phi, phi);
  }
  const double rho = spectral_radius(sum);
  // The condition presupposes a stationary mean.
  return {rho < 1.0 && check_mean_stationarity(model).holds, rho};
}

CriterionValue check_strict_sufficient(const MmarModel& model) {
  model.validate();
  const auto r = radii(model);
  double v = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] == 0.0) return {true, -std::numeric_limits<double>::infinity()};
    v += model.alphas[k] * std::log(r[k]);
  }
  return {v < 0.0, v};
}

QthMoment check_qth_moment(const MmarModel& model, double q) {
  if (!(q > 0.0)) throw InvalidParameter("q-th moment criterion: q must be positive");
  model.validate();
  const auto r = radii(model);
  QthMoment out;
  out.q = q;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double rq = std::pow(r[k], q);
    out.weighted += model.alphas[k] * rq;
    out.unweighted += rq;
  }
  out.holds = out.weighted < 1.0;
  return out;
}

LyapunovEstimate estimate_lyapunov(const MmarModel& model, int horizon, int replications,
                                   std::uint64_t seed) {
  if (horizon < 1) throw InvalidParameter("estimate_lyapunov: horizon must be at least 1");
  if (replications < 2) throw InvalidParameter("estimate_lyapunov: need at least 2 replications");
  model.validate();
  std::vector<Matrix> phis;
  for (int k = 0; k < model.spec.K(); ++k) phis.push_back(companion_matrix(model, k));
  const Index d = phis.front().rows();

  std::vector<double> values(static_cast<std::size_t>(replications));
  parallel_for(values.size(), [&](std::size_t r) {
    Rng rng(sub_seed(seed, r));
    Matrix prod = Matrix::Identity(d, d);
    Matrix next(d, d);
    double acc = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const int k = draw_component(model.alphas, rng);
      next.noalias() = phis[static_cast<std::size_t>(k)] * prod;
      const double s = next.norm();
      if (s == 0.0) {
        acc = -std::numeric_limits<double>::infinity();
        break;
      }
      acc += std::log(s);
      prod = next / s;
    }
    values[r] = acc / horizon;
  });

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= replications;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  LyapunovEstimate out;
  out.gamma = mean;
  out.se = std::isfinite(mean) ? std::sqrt(ss / (replications - 1) / replications) : 0.0;
  out.horizon = horizon;
  out.replications = replications;
  return out;
}

StationarityReport stationarity_report(const MmarModel& model, const StationarityOptions& opts) {
  StationarityReport rep;
  rep.component_radii = radii(model);
  rep.order_one = all_order_one(model);
  rep.companion_extension = !rep.order_one;
  rep.mean = check_mean_stationarity(model);
  try {
    rep.second_order = check_second_order_stationarity(model, opts.row_cap);
    if (!rep.mean.holds) rep.second_order_note = "fails because the mean is not stationary";
  } catch (const InvalidParameter& e) {
    rep.second_order_note = std::string("not evaluated: ") + e.what();
  }
  rep.strict = check_strict_sufficient(model);
  if (rep.order_one) {
    double v = 0.0;
    for (int k = 0; k < model.spec.K(); ++k) {
      const auto& c = model.components[static_cast<std::size_t>(k)];
      v += model.alphas[static_cast<std::size_t>(k)] * std::log(spectral_radius(c.B[0]) * spectral_radius(c.A[0]));
    }
    rep.strict_simplified = v;
  }
  for (double q : opts.qs) rep.qth.push_back(check_qth_moment(model, q));
  if (opts.lyapunov) rep.lyapunov = estimate_lyapunov(model, opts.horizon, opts.replications, opts.seed);
  return rep;
}

}  // namespace mmar
