#include "mmar/inference.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>

#include "mmar/error.hpp"
#include "mmar/parallel.hpp"

namespace mmar {

namespace {

// G^T vec(M): gradient with respect to vech of a symmetric argument, given
// the gradient M with respect to its full matrix.
Vector vech_gradient(const Matrix& m) {
  const Index n = m.rows();
  Vector out(vech_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) out(k++) = i == j ? m(i, i) : m(i, j) + m(j, i);
  return out;
}

}  // namespace

Vector score_gamma(const MmarModel& model, const MatrixSeries& data, Index t) {
  model.validate();
  const Index m = model.spec.m;
  const Index n = model.spec.n;
  const int K = model.spec.K();
  const auto evals = make_evals(model);
  const DensityValue dens = conditional_log_density(model, evals, data, t);
  const auto lay = ParamLayout::gamma(model.spec);
  Vector g = Vector::Zero(lay.size);
  std::vector<double> tau(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    tau[static_cast<std::size_t>(k)] =
        std::exp(std::log(model.alphas[static_cast<std::size_t>(k)]) + dens.component_logs[static_cast<std::size_t>(k)] -
                 dens.mixture);
  const Matrix y = data.at(t);
  for (int k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const auto& ev = evals[ku];
    const auto& c = ev.component();
    const auto& b = lay.comps[ku];
    const double w = tau[ku];
    const Matrix eps = y - ev.mean_at(data, t);
    const Matrix gm = ev.u_inv() * eps * ev.v_inv();
    for (std::size_t i = 0; i < c.A.size(); ++i) {
      const Matrix x = data.at(t - static_cast<Index>(i) - 1);
      g.segment(b.a[i], m * m) = w * vec(gm * c.B[i] * x.transpose());
      g.segment(b.b[i], n * n) = w * vec(gm.transpose() * c.A[i] * x);
    }
    g.segment(b.c, m * n) = w * vec(gm);
    const Matrix du = 0.5 * static_cast<double>(n) * ev.u().matrix() - 0.5 * eps * ev.v_inv() * eps.transpose();
    const Matrix dv = 0.5 * static_cast<double>(m) * ev.v().matrix() - 0.5 * eps.transpose() * ev.u_inv() * eps;
    g.segment(b.u, vech_size(m)) = w * vech_gradient(du);
    g.segment(b.v, vech_size(n)) = w * vech_gradient(dv);
  }
  const double last = tau.back() / model.alphas.back();
  for (int k = 0; k + 1 < K; ++k)
    g(lay.alpha + k) = tau[static_cast<std::size_t>(k)] / model.alphas[static_cast<std::size_t>(k)] - last;
  return g;
}

Vector score_theta(const MmarModel& model, const MatrixSeries& data, Index t) {
  const ThetaVector theta = pack_theta(model);
  return theta_jacobian(theta).transpose() * score_gamma(model, data, t);
}

Vector total_score_gamma(const MmarModel& model, const MatrixSeries& data) {
  model.validate();
  const Index m = model.spec.m;
  const Index n = model.spec.n;
  const int K = model.spec.K();
  const Design d(data, model.spec.p_max());
  const EStep es = e_step(model, d);
  const auto lay = ParamLayout::gamma(model.spec);
  Vector g = Vector::Zero(lay.size);
  for (int k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const auto& c = model.components[ku];
    const ComponentEval ev(c, m, n);
    const auto& b = lay.comps[ku];
    const Vector tau = es.tau.col(k);
    const double w = tau.sum();
    const Matrix r = component_residuals(c, d);
    const Matrix rw = r * tau.asDiagonal();
    for (std::size_t i = 0; i < c.A.size(); ++i) {
      const Matrix sx = rw * d.z().middleRows(d.offset(static_cast<int>(i) + 1), d.mn()).transpose();
      g.segment(b.a[i], m * m) = vec(ev.u_inv() * contract_rows(sx, ev.v_inv() * c.B[i], m, n));
      g.segment(b.b[i], n * n) = vec(ev.v_inv() * contract_cols(sx, ev.u_inv() * c.A[i], m, n));
    }
    g.segment(b.c, m * n) = vec(ev.u_inv() * mat(r * tau, m, n) * ev.v_inv());
    const Matrix see = rw * r.transpose();
    const Matrix du = 0.5 * static_cast<double>(n) * w * ev.u().matrix() - 0.5 * contract_rows(see, ev.v_inv(), m, n);
    const Matrix dv = 0.5 * static_cast<double>(m) * w * ev.v().matrix() - 0.5 * contract_cols(see, ev.u_inv(), m, n);
    g.segment(b.u, vech_size(m)) = vech_gradient(du);
    g.segment(b.v, vech_size(n)) = vech_gradient(dv);
  }
  const Vector totals = es.tau.colwise().sum();
  const double last = totals(K - 1) / model.alphas.back();
  for (int k = 0; k + 1 < K; ++k) g(lay.alpha + k) = totals(k) / model.alphas[static_cast<std::size_t>(k)] - last;
  return g;
}

Vector total_score_theta(const MmarModel& model, const MatrixSeries& data) {
  const ThetaVector theta = pack_theta(model);
  return theta_jacobian(theta).transpose() * total_score_gamma(model, data);
}

Information observed_information(const MmarModel& model, const MatrixSeries& data, InfoMethod method) {
  const ThetaVector theta = pack_theta(model);
  const Index dim = theta.values.size();
  Information info;
  Matrix h(dim, dim);
  if (method == InfoMethod::numeric_hessian) {
    parallel_for(static_cast<std::size_t>(dim), [&](std::size_t j) {
      const double step = 1e-5 * (1.0 + std::abs(theta.values(static_cast<Index>(j))));
      ThetaVector plus = theta;
      ThetaVector minus = theta;
      plus.values(static_cast<Index>(j)) += step;
      minus.values(static_cast<Index>(j)) -= step;
      const MmarModel mp = unpack_theta(plus);
      const MmarModel mm = unpack_theta(minus);
      const Vector sp = theta_jacobian(plus).transpose() * total_score_gamma(mp, data);
      const Vector sm = theta_jacobian(minus).transpose() * total_score_gamma(mm, data);
      h.col(static_cast<Index>(j)) = -(sp - sm) / (2.0 * step);
    });
  } else {
    const Matrix jac = theta_jacobian(theta);
    h.setZero();
    for (Index t = model.spec.p_max(); t < data.length(); ++t) {
      const Vector s = jac.transpose() * score_gamma(model, data, t);
      h.selfadjointView<Eigen::Lower>().rankUpdate(s);
    }
    h = h.selfadjointView<Eigen::Lower>();
  }
  info.total = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(info.total);
  if (es.info() != Eigen::Success) throw NumericalError("observed_information: eigen-decomposition failed");
  if (es.eigenvalues().minCoeff() < 1e-10) {
    info.projected = true;
    info.warnings.push_back("information matrix not positive definite (min eigenvalue " +
                            std::to_string(es.eigenvalues().minCoeff()) + "); eigenvalues clipped at 1e-10");
    const Vector ev = es.eigenvalues().cwiseMax(1e-10);
    info.total = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    info.total = 0.5 * (info.total + info.total.transpose());
  }
  return info;
}

InferenceReport infer(const MmarModel& model, const MatrixSeries& data, InfoMethod method) {
  InferenceReport rep;
  rep.theta_hat = pack_theta(model);
  rep.method = method;
  rep.n_obs = data.length() - model.spec.p_max();
  Information info = observed_information(model, data, method);
  rep.projected = info.projected;
  rep.warnings = std::move(info.warnings);
  const Eigen::LLT<Matrix> llt(info.total);
  if (llt.info() != Eigen::Success) throw NumericalError("infer: information matrix is singular");
  const Index dim = info.total.rows();
  rep.covariance = llt.solve(Matrix::Identity(dim, dim));
  rep.covariance = 0.5 * (rep.covariance + rep.covariance.transpose());
  rep.standard_errors = rep.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  const Matrix jac = theta_jacobian(rep.theta_hat);
  const Matrix gcov = jac * rep.covariance * jac.transpose();
  rep.gamma_standard_errors = gcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  const int K = model.spec.K();
  if (K > 1) {
    const auto a0 = ParamLayout::theta(model.spec).alpha;
    rep.last_alpha_se = std::sqrt(std::max(0.0, rep.covariance.block(a0, a0, K - 1, K - 1).sum()));
  }
  return rep;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("normal_quantile: p must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double chi2_quantile(double df, double p) {
  if (!(df > 0.0)) throw InvalidParameter("chi2_quantile: df must be positive");
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("chi2_quantile: p must lie in (0,1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), p);
}

namespace {

std::vector<WaldInterval> intervals(const Vector& est, const Vector& se, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidParameter("wald_intervals: level must lie in (0,1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double z5 = normal_quantile(0.975);
  std::vector<WaldInterval> out;
  for (Index j = 0; j < est.size(); ++j) {
    WaldInterval w;
    w.estimate = est(j);
    w.lo = est(j) - z * se(j);
    w.hi = est(j) + z * se(j);
    if (se(j) > 0.0) {
      if (est(j) - z5 * se(j) > 0.0) w.mark = '+';
      else if (est(j) + z5 * se(j) < 0.0) w.mark = '-';
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace

std::vector<WaldInterval> wald_intervals(const InferenceReport& report, double level) {
  return intervals(report.theta_hat.values, report.standard_errors, level);
}

std::vector<WaldInterval> gamma_wald_intervals(const InferenceReport& report, double level) {
  return intervals(theta_to_gamma(report.theta_hat), report.gamma_standard_errors, level);
}

bool joint_ellipse_test(const InferenceReport& report, const std::vector<Index>& xi, double level,
                        const Vector& theta_true) {
  const Index dim = report.theta_hat.values.size();
  if (theta_true.size() != dim) throw DimensionError("joint_ellipse_test: theta_true has the wrong length");
  if (xi.empty()) throw DimensionError("joint_ellipse_test: empty index set");
  const auto q = static_cast<Index>(xi.size());
  Matrix sub(q, q);
  Vector diff(q);
  for (Index a = 0; a < q; ++a) {
    const Index ia = xi[static_cast<std::size_t>(a)];
    if (ia < 0 || ia >= dim) throw DimensionError("joint_ellipse_test: index out of range");
    diff(a) = report.theta_hat.values(ia) - theta_true(ia);
    for (Index b = 0; b < q; ++b) sub(a, b) = report.covariance(ia, xi[static_cast<std::size_t>(b)]);
  }
  const Eigen::LLT<Matrix> llt(sub);
  if (llt.info() != Eigen::Success) throw NumericalError("joint_ellipse_test: sub-covariance is singular");
  const double stat = diff.dot(llt.solve(diff));
  return stat <= chi2_quantile(static_cast<double>(q), level);
}

}  // namespace mmar
