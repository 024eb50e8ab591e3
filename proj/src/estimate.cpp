#include "mmar/estimate.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "mmar/error.hpp"
#include "mmar/kernels.hpp"
#include "mmar/parallel.hpp"
#include "mmar/rng.hpp"

namespace mmar {

void EmOptions::validate() const {
  if (max_em_iters < 1 || max_inner_iters < 1) throw InvalidParameter("EM options: iteration caps must be >= 1");
  if (!(em_rel_tol > 0.0) || !(inner_rel_tol > 0.0)) throw InvalidParameter("EM options: tolerances must be > 0");
  if (ridge_jitter < 0.0) throw InvalidParameter("EM options: ridge_jitter must be >= 0");
  if (n_starts < 0) throw InvalidParameter("EM options: n_starts must be >= 0");
  if (univariate_starts < 1) throw InvalidParameter("EM options: univariate_starts must be >= 1");
  if (!(max_condition > 1.0)) throw InvalidParameter("EM options: max_condition must be > 1");
}

Design::Design(const MatrixSeries& data, int p_max) : m_(data.rows()), n_(data.cols()), p_(p_max) {
  if (p_max < 0) throw InvalidParameter("design: negative lag order");
  const Index T = data.length();
  if (T <= p_max)
    throw DimensionError("series of length " + std::to_string(T) + " has no observations beyond p_max = " +
                         std::to_string(p_max));
  const Index mn = m_ * n_;
  const Index N = T - p_max;
  z_.resize(1 + mn * (p_max + 1), N);
  const Matrix& y = data.stacked();
  for (Index j = 0; j < N; ++j) {
    const Index t = p_max + j;
    z_(0, j) = 1.0;
    for (int b = 0; b <= p_max; ++b) z_.block(offset(b), j, mn, 1) = y.col(t - b);
  }
  const double ms = y.squaredNorm() / static_cast<double>(y.size());
  scale_ = ms > 0.0 ? std::sqrt(ms) : 1.0;
}

namespace {

// [-vec C, I, -Phi_1, ..., -Phi_p, 0, ...]: residual operator on z_t.
Matrix residual_operator(const MmarComponent& comp, const Design& d) {
  const Index mn = d.mn();
  Matrix l = Matrix::Zero(mn, d.dim());
  l.col(0) = -vec(comp.C);
  l.block(0, d.offset(0), mn, mn).setIdentity();
  for (std::size_t i = 0; i < comp.A.size(); ++i)
    l.block(0, d.offset(static_cast<int>(i) + 1), mn, mn) = -kron(comp.B[i], comp.A[i]);
  return l;
}

void add_flag(MStepLog* log, const std::string& flag) {
  if (!log) return;
  if (std::find(log->flags.begin(), log->flags.end(), flag) == log->flags.end()) log->flags.push_back(flag);
}

// Solves D X = R for symmetric positive semidefinite D. A singular D gets one
// retry with a diagonal ridge.
Matrix solve_gram(Matrix dmat, const Matrix& rhs, const EmOptions& opts, MStepLog* log, const char* what) {
  dmat = 0.5 * (dmat + dmat.transpose());
  auto attempt = [&](const Matrix& g, Matrix& out) {
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) return false;
    const auto diag = llt.matrixLLT().diagonal();
    const double hi = diag.cwiseAbs().maxCoeff();
    const double lo = diag.cwiseAbs().minCoeff();
    if (!(hi > 0.0) || lo * lo < 1e-14 * hi * hi) return false;
    out = llt.solve(rhs);
    return out.allFinite();
  };
  Matrix out;
  if (attempt(dmat, out)) return out;
  const double tr = dmat.trace() / static_cast<double>(dmat.rows());
  const double ridge = opts.ridge_jitter * (tr > 0.0 ? tr : 1.0);
  Matrix jittered = dmat;
  jittered.diagonal().array() += ridge;
  if (ridge > 0.0 && attempt(jittered, out)) {
    add_flag(log, std::string("ridge jitter added to a singular Gram matrix in the ") + what + "-update");
    return out;
  }
  throw NumericalError(std::string("singular Gram matrix in the ") + what + "-update (ridge retry failed)");
}

// Symmetrize and clip eigenvalues from below.
Matrix floor_spd(const Matrix& s, double floor, MStepLog* log, const char* what) {
  Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError(std::string("eigen-decomposition failed in the ") + what + "-update");
  if (es.eigenvalues().minCoeff() >= floor && sym.allFinite()) return sym;
  add_flag(log, std::string("eigenvalue floor applied to ") + what);
  const Vector ev = es.eigenvalues().cwiseMax(floor);
  Matrix out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

struct GramView {
  const Matrix& w;
  const Design& d;
  double weight() const { return w(0, 0); }
  auto s(int b) const { return w.block(d.offset(b), 0, d.mn(), 1); }
  auto S(int a, int b) const { return w.block(d.offset(a), d.offset(b), d.mn(), d.mn()); }
};

}  // namespace

Matrix component_residuals(const MmarComponent& comp, const Design& design) {
  return residual_operator(comp, design) * design.z();
}

Matrix weighted_gram(const Design& design, const Eigen::Ref<const Vector>& weights) {
  if (weights.size() != design.targets()) throw DimensionError("weighted_gram: one weight per target required");
  Matrix g = Matrix::Zero(design.dim(), design.dim());
  const Vector w = weights;
  kernels::weighted_gram(design.z().data(), static_cast<std::size_t>(design.dim()),
                         static_cast<std::size_t>(design.targets()), w.data(), g.data());
  return g;
}

EStep e_step(const MmarModel& model, const Design& design) {
  model.validate();
  if (model.spec.m != design.m() || model.spec.n != design.n() || model.spec.p_max() != design.p_max())
    throw DimensionError("e_step: model does not match the data design");
  const Index N = design.targets();
  const int K = model.spec.K();
  const Index mn = design.mn();
  Matrix logs(N, K);
  Vector q(N);
  for (int k = 0; k < K; ++k) {
    const auto& comp = model.components[static_cast<std::size_t>(k)];
    const ComponentEval ev(comp, design.m(), design.n());
    const Matrix lu_inv = ev.u().llt().matrixL().solve(Matrix::Identity(design.m(), design.m()));
    const Matrix lv_inv = ev.v().llt().matrixL().solve(Matrix::Identity(design.n(), design.n()));
    const Matrix op = kron(lv_inv, lu_inv) * residual_operator(comp, design);
    const Matrix white = op * design.z();
    kernels::column_sq_norms(white.data(), static_cast<std::size_t>(mn), static_cast<std::size_t>(N), q.data());
    const double la = std::log(model.alphas[static_cast<std::size_t>(k)]);
    logs.col(k) = (la + ev.log_const()) - 0.5 * q.array();
  }
  EStep out;
  out.tau.resize(N, K);
  out.point_logliks.resize(N);
  for (Index j = 0; j < N; ++j) {
    const double mx = logs.row(j).maxCoeff();
    if (!std::isfinite(mx))
      throw NumericalError("e_step: every component density underflows at t = " +
                           std::to_string(design.p_max() + j + 1));
    const double lse = mx + std::log((logs.row(j).array() - mx).exp().sum());
    out.point_logliks(j) = lse;
    out.tau.row(j) = (logs.row(j).array() - lse).exp();
    out.tau.row(j) /= out.tau.row(j).sum();
  }
  out.loglik = out.point_logliks.sum();
  return out;
}

ResponsibilityMatrix e_step(const MmarModel& model, const MatrixSeries& data) {
  return e_step(model, Design(data, model.spec.p_max())).tau;
}

double log_likelihood(const MmarModel& model, const MatrixSeries& data) {
  return e_step(model, Design(data, model.spec.p_max())).loglik;
}

double component_objective(const MmarComponent& comp, double alpha, const Matrix& gram, const Design& d) {
  const GramView g{gram, d};
  const double w = g.weight();
  const Matrix l = residual_operator(comp, d);
  const Matrix e = l * gram * l.transpose();
  const SpdMatrix u(comp.U);
  const SpdMatrix v(comp.V);
  const auto m = static_cast<double>(d.m());
  const auto n = static_cast<double>(d.n());
  double q = -w * (0.5 * m * n * kLog2Pi + 0.5 * m * v.log_det() + 0.5 * n * u.log_det());
  if (alpha > 0.0) q += w * std::log(alpha);
  const Matrix r = contract_rows(e, v.inverse(), d.m(), d.n());
  q -= 0.5 * (u.inverse().cwiseProduct(r)).sum();
  return q;
}

void update_block(Block block, MmarComponent& comp, const Matrix& gram, const Design& d, const EmOptions& opts,
                  MStepLog* log) {
  const GramView g{gram, d};
  const Index m = d.m();
  const Index n = d.n();
  const auto p = static_cast<int>(comp.A.size());
  const double w = g.weight();
  if (!(w > 0.0)) throw NumericalError("component update with zero total weight");
  const Vector c = vec(comp.C);
  const double floor = 1e-8 * d.scale();

  switch (block) {
    case Block::A: {
      const Matrix v_inv = SpdMatrix(comp.V).inverse();
      Matrix num(m, m * p);
      Matrix den(m * p, m * p);
      for (int j = 0; j < p; ++j) {
        const Matrix cross = g.S(0, j + 1) - c * g.s(j + 1).transpose();
        num.block(0, j * m, m, m) = contract_rows(cross, v_inv * comp.B[j], m, n);
        for (int i = 0; i < p; ++i)
          den.block(i * m, j * m, m, m) =
              contract_rows(g.S(i + 1, j + 1), comp.B[i].transpose() * v_inv * comp.B[j], m, n);
      }
      const Matrix sol = solve_gram(den, num.transpose(), opts, log, "A").transpose();
      for (int i = 0; i < p; ++i) comp.A[i] = sol.block(0, i * m, m, m);
      break;
    }
    case Block::B: {
      const Matrix u_inv = SpdMatrix(comp.U).inverse();
      Matrix num(n, n * p);
      Matrix den(n * p, n * p);
      for (int j = 0; j < p; ++j) {
        const Matrix cross = g.S(0, j + 1) - c * g.s(j + 1).transpose();
        num.block(0, j * n, n, n) = contract_cols(cross, u_inv * comp.A[j], m, n);
        for (int i = 0; i < p; ++i)
          den.block(i * n, j * n, n, n) =
              contract_cols(g.S(i + 1, j + 1), comp.A[i].transpose() * u_inv * comp.A[j], m, n);
      }
      const Matrix sol = solve_gram(den, num.transpose(), opts, log, "B").transpose();
      for (int i = 0; i < p; ++i) comp.B[i] = sol.block(0, i * n, n, n);
      break;
    }
    case Block::C: {
      Vector r = g.s(0);
      for (int j = 0; j < p; ++j) r -= kron(comp.B[j], comp.A[j]) * g.s(j + 1);
      comp.C = mat(r / w, m, n);
      break;
    }
    case Block::U: {
      const Matrix l = residual_operator(comp, d);
      const Matrix e = l * gram * l.transpose();
      const Matrix v_inv = SpdMatrix(comp.V).inverse();
      comp.U = floor_spd(contract_rows(e, v_inv, m, n) / (static_cast<double>(n) * w), floor, log, "U");
      break;
    }
    case Block::V: {
      const Matrix l = residual_operator(comp, d);
      const Matrix e = l * gram * l.transpose();
      const Matrix u_inv = SpdMatrix(comp.U).inverse();
      comp.V = floor_spd(contract_cols(e, u_inv, m, n) / (static_cast<double>(m) * w), floor, log, "V");
      break;
    }
  }
}

double update_component(MmarComponent& comp, const Matrix& gram, const Design& d, const EmOptions& opts,
                        MStepLog* log) {
  double q = component_objective(comp, 0.0, gram, d);
  for (int it = 0; it < opts.max_inner_iters; ++it) {
    for (Block b : {Block::A, Block::B, Block::C, Block::U, Block::V}) update_block(b, comp, gram, d, opts, log);
    const double next = component_objective(comp, 0.0, gram, d);
    if (log) ++log->inner_iters;
    if (!std::isfinite(next)) throw NumericalError("component objective became non-finite in the M-step");
    const bool done = std::abs(next - q) <= opts.inner_rel_tol * (1.0 + std::abs(q));
    q = next;
    if (done) break;
  }
  return q;
}

MmarModel m_step(const MmarModel& model, const Design& d, const ResponsibilityMatrix& tau, const EmOptions& opts,
                 MStepLog* log) {
  const int K = model.spec.K();
  const Index N = d.targets();
  if (tau.rows() != N || tau.cols() != K) throw DimensionError("m_step: responsibility matrix has the wrong shape");
  MmarModel out = model;
  const Vector totals = tau.colwise().sum();
  const double eps = std::numeric_limits<double>::epsilon();
  Index dominant = 0;
  totals.maxCoeff(&dominant);

  std::vector<bool> restarted(static_cast<std::size_t>(K), false);
  for (int k = 0; k < K; ++k) {
    if (totals(k) < K * eps) {
      restarted[static_cast<std::size_t>(k)] = true;
      continue;
    }
    const Matrix gram = weighted_gram(d, tau.col(k));
    update_component(out.components[static_cast<std::size_t>(k)], gram, d, opts, log);
    out.alphas[static_cast<std::size_t>(k)] = totals(k) / static_cast<double>(N);
  }
  for (int k = 0; k < K; ++k) {
    if (!restarted[static_cast<std::size_t>(k)]) continue;
    add_flag(log, "empty component restarted from a perturbed copy of the dominant one");
    Rng rng(sub_seed(0x5eedULL, static_cast<std::uint64_t>(k)));
    MmarComponent c = out.components[static_cast<std::size_t>(dominant)];
    for (auto& a : c.A) a += 0.05 * a.cwiseAbs().maxCoeff() * normal_matrix(a.rows(), a.cols(), rng);
    c.C += 0.5 * d.scale() * normal_matrix(c.C.rows(), c.C.cols(), rng);
    c.A.resize(static_cast<std::size_t>(model.spec.orders[static_cast<std::size_t>(k)]),
               Matrix::Zero(d.m(), d.m()));
    c.B.resize(c.A.size(), Matrix::Identity(d.n(), d.n()) / std::sqrt(static_cast<double>(d.n())));
    out.components[static_cast<std::size_t>(k)] = std::move(c);
    out.alphas[static_cast<std::size_t>(k)] = 1.0 / static_cast<double>(N);
  }
  double total = 0.0;
  for (double a : out.alphas) total += a;
  for (double& a : out.alphas) a /= total;
  return out;
}

MmarModel m_step(const MmarModel& model, const MatrixSeries& data, const ResponsibilityMatrix& tau,
                 const EmOptions& opts) {
  return m_step(model, Design(data, model.spec.p_max()), tau, opts);
}

double covariance_condition(const MmarComponent& comp) {
  auto cond = [](const Matrix& s) {
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::EigenvaluesOnly).eigenvalues();
    return ev(ev.size() - 1) / ev(0);
  };
  return cond(comp.U) * cond(comp.V);
}

FitReport fit_em(const MatrixSeries& data, const MmarModel& init, const EmOptions& opts) {
  opts.validate();
  init.validate();
  if (init.spec.m != data.rows() || init.spec.n != data.cols())
    throw DimensionError("fit_em: initial model does not match the data dimensions");
  const Design d(data, init.spec.p_max());
  FitReport rep;
  MStepLog log;
  MmarModel model = init;
  EStep es = e_step(model, d);
  if (!std::isfinite(es.loglik)) throw NumericalError("fit_em: non-finite log-likelihood at the initial value");
  rep.loglik_trace.push_back(es.loglik);
  double prev = es.loglik;
  for (int it = 1; it <= opts.max_em_iters; ++it) {
    model = m_step(model, d, es.tau, opts, &log);
    for (int k = 0; k < model.spec.K(); ++k) {
      const double cond = covariance_condition(model.components[static_cast<std::size_t>(k)]);
      if (!(cond <= opts.max_condition))
        throw NumericalError("fit_em: component " + std::to_string(k + 1) + " degenerated at iteration " +
                             std::to_string(it) + " (covariance condition number " + std::to_string(cond) + ")");
    }
    es = e_step(model, d);
    if (!std::isfinite(es.loglik))
      throw NumericalError("fit_em: log-likelihood became non-finite at iteration " + std::to_string(it));
    rep.loglik_trace.push_back(es.loglik);
    rep.n_iters = it;
    if (es.loglik < prev - 1e-8)
      add_flag(&log, "log-likelihood decreased at iteration " + std::to_string(it));
    const bool done = std::abs(es.loglik - prev) <= opts.em_rel_tol * (1.0 + std::abs(prev));
    prev = es.loglik;
    if (done) {
      rep.converged = true;
      break;
    }
  }
  rep.model = normalize(model);
  const EStep final_es = e_step(rep.model, d);
  rep.responsibilities = final_es.tau;
  rep.loglik = es.loglik;
  rep.flags = std::move(log.flags);
  for (auto& w : distinctness_warnings(rep.model)) rep.flags.push_back(std::move(w));
  return rep;
}

MmarComponent fit_weighted_mar(const Design& d, const Vector& weights, int order, const EmOptions& opts,
                               MStepLog* log) {
  const Index m = d.m();
  const Index n = d.n();
  if (order < 1 || order > d.p_max()) throw InvalidParameter("fit_weighted_mar: order outside 1..p_max");
  const Matrix gram = weighted_gram(d, weights);
  const double w = gram(0, 0);
  if (!(w > 0.0)) throw NumericalError("fit_weighted_mar: zero total weight");
  MmarComponent c;
  c.A.assign(static_cast<std::size_t>(order), Matrix::Zero(m, m));
  c.B.assign(static_cast<std::size_t>(order), Matrix::Identity(n, n) / std::sqrt(static_cast<double>(n)));
  c.C = mat(gram.block(d.offset(0), 0, d.mn(), 1) / w, m, n);
  c.U = Matrix::Identity(m, m);
  c.V = Matrix::Identity(n, n);
  update_block(Block::U, c, gram, d, opts, log);
  double q = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < opts.max_em_iters; ++r) {
    const double next = update_component(c, gram, d, opts, log);
    const bool done = std::isfinite(q) && std::abs(next - q) <= opts.em_rel_tol * (1.0 + std::abs(q));
    q = next;
    if (done) break;
  }
  return c;
}

namespace {

// OLS fit of a scalar AR(p): returns [c, a_1..a_p] and the residual variance.
std::pair<Vector, double> scalar_ar_ols(const Design& d) {
  const Index p = d.p_max();
  Matrix x(p + 1, d.targets());
  x.row(0) = d.z().row(0);
  for (Index i = 1; i <= p; ++i) x.row(i) = d.z().row(d.offset(static_cast<int>(i)));
  const Vector y = d.z().row(d.offset(0)).transpose();
  Matrix xx = x * x.transpose();
  xx.diagonal().array() += 1e-10 * (1.0 + xx.trace());
  const Vector beta = xx.llt().solve(x * y);
  const Vector resid = y - x.transpose() * beta;
  const double var = std::max(resid.squaredNorm() / static_cast<double>(d.targets()), 1e-12 * d.scale() * d.scale());
  return {beta, var};
}

std::optional<MmarModel> segment_model(const Design& d, const MmarSpec& spec, const std::vector<int>& labels,
                                       const EmOptions& opts, std::string* warning) {
  const int K = spec.K();
  const Index N = d.targets();
  std::vector<Index> counts(static_cast<std::size_t>(K), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  for (int k = 0; k < K; ++k)
    if (counts[static_cast<std::size_t>(k)] < spec.p_max() + 2) {
      if (warning)
        *warning = "segment " + std::to_string(k + 1) + " has " + std::to_string(counts[static_cast<std::size_t>(k)]) +
                   " points (fewer than p_max + 2)";
      return std::nullopt;
    }
  MmarModel model;
  model.spec = spec;
  for (int k = 0; k < K; ++k) {
    Vector mask = Vector::Zero(N);
    for (Index j = 0; j < N; ++j)
      if (labels[static_cast<std::size_t>(j)] == k) mask(j) = 1.0;
    model.components.push_back(fit_weighted_mar(d, mask, spec.orders[static_cast<std::size_t>(k)], opts));
    model.alphas.push_back(static_cast<double>(counts[static_cast<std::size_t>(k)]) / static_cast<double>(N));
  }
  model.validate();
  return model;
}

// Candidate s: scalar series s mod mn, univariate mixture fit, argmax split,
// per-segment MAR fits.
std::optional<MmarModel> initial_candidate(const MatrixSeries& data, const Design& d, const MmarSpec& spec, int s,
                                           const EmOptions& opts, std::string* warning) {
  const Index mn = d.mn();
  const Index series = s % mn;
  const int K = spec.K();
  Rng rng(sub_seed(opts.seed, static_cast<std::uint64_t>(s)));

  const MatrixSeries scalar(1, 1, Matrix(data.stacked().row(series)));
  const Design ds(scalar, d.p_max());
  const auto [beta, var] = scalar_ar_ols(ds);
  const double sd = std::sqrt(var);

  MmarSpec uni = spec;
  uni.m = 1;
  uni.n = 1;
  EmOptions uopts = opts;
  uopts.max_em_iters = std::min(opts.max_em_iters, 300);
  uopts.em_rel_tol = std::max(opts.em_rel_tol, 1e-7);

  std::optional<FitReport> best;
  for (int u = 0; u < opts.univariate_starts; ++u) {
    MmarModel init;
    init.spec = uni;
    for (int k = 0; k < K; ++k) {
      MmarComponent c;
      for (int i = 1; i <= uni.orders[static_cast<std::size_t>(k)]; ++i) {
        Matrix a(1, 1);
        a(0, 0) = beta(i) + 0.3 * (std::abs(beta(i)) + 0.1) * std_normal(rng);
        c.A.push_back(a);
        c.B.push_back(Matrix::Ones(1, 1));
      }
      c.C = Matrix::Constant(1, 1, beta(0) + sd * std_normal(rng));
      c.U = Matrix::Constant(1, 1, var * std::exp(0.7 * std_normal(rng)));
      c.V = Matrix::Ones(1, 1);
      init.components.push_back(std::move(c));
      init.alphas.push_back(1.0 / K);
    }
    try {
      FitReport r = fit_em(scalar, init, uopts);
      if (!best || r.loglik > best->loglik) best = std::move(r);
    } catch (const Error&) {
    }
  }
  if (!best) {
    if (warning) *warning = "univariate mixture fit failed on scalar series " + std::to_string(series + 1);
    return std::nullopt;
  }
  std::vector<int> labels(static_cast<std::size_t>(d.targets()));
  for (Index j = 0; j < d.targets(); ++j) {
    Index k = 0;
    best->responsibilities.row(j).maxCoeff(&k);
    labels[static_cast<std::size_t>(j)] = static_cast<int>(k);
  }
  MmarSpec seg = spec;
  seg.orders = best->model.spec.orders;
  auto model = segment_model(d, seg, labels, opts, warning);
  if (!model && warning) *warning = "candidate from scalar series " + std::to_string(series + 1) + " skipped: " + *warning;
  return model;
}

std::optional<MmarModel> random_partition_candidate(const Design& d, const MmarSpec& spec, int s,
                                                    const EmOptions& opts) {
  Rng rng(sub_seed(opts.seed ^ 0xA5A5A5A5ULL, static_cast<std::uint64_t>(s)));
  // Contiguous blocks of random length, randomly labelled: keeps some
  // temporal structure in every segment.
  std::vector<int> labels(static_cast<std::size_t>(d.targets()));
  const int K = spec.K();
  for (std::size_t j = 0; j < labels.size();) {
    const int k = static_cast<int>(uniform01(rng) * K) % K;
    const auto len = static_cast<std::size_t>(1 + uniform01(rng) * 10);
    for (std::size_t r = 0; r < len && j < labels.size(); ++r, ++j) labels[j] = k;
  }
  return segment_model(d, spec, labels, opts, nullptr);
}

MmarModel single_component_fit(const Design& d, const MmarSpec& spec, const EmOptions& opts) {
  MmarModel model;
  model.spec = spec;
  model.components.push_back(fit_weighted_mar(d, Vector::Ones(d.targets()), spec.orders[0], opts));
  model.alphas.push_back(1.0);
  return model;
}

int candidate_count(const MmarSpec& spec, const EmOptions& opts) {
  return opts.n_starts > 0 ? opts.n_starts : static_cast<int>(spec.mn());
}

}  // namespace

InitialValues initial_values(const MatrixSeries& data, const MmarSpec& spec, const EmOptions& opts) {
  spec.validate();
  opts.validate();
  const Design d(data, spec.p_max());
  InitialValues out;
  if (spec.K() == 1) {
    out.candidates.push_back(single_component_fit(d, spec, opts));
    out.series.push_back(-1);
    return out;
  }
  const int count = candidate_count(spec, opts);
  for (int s = 0; s < count; ++s) {
    std::string warning;
    auto c = initial_candidate(data, d, spec, s, opts, &warning);
    if (c) {
      out.candidates.push_back(std::move(*c));
      out.series.push_back(static_cast<int>(s % d.mn()));
    } else {
      out.warnings.push_back(warning);
    }
  }
  return out;
}

FitReport fit_multistart(const MatrixSeries& data, const MmarSpec& spec, const EmOptions& opts) {
  spec.validate();
  opts.validate();
  if (spec.m != data.rows() || spec.n != data.cols())
    throw DimensionError("fit_multistart: spec does not match the data dimensions");
  const Design d(data, spec.p_max());
  if (spec.K() == 1) {
    FitReport r = fit_em(data, single_component_fit(d, spec, opts), opts);
    r.start_logliks = {r.loglik};
    return r;
  }

  const int count = candidate_count(spec, opts);
  std::vector<std::optional<FitReport>> fits(static_cast<std::size_t>(count));
  std::vector<std::string> notes(static_cast<std::size_t>(count));
  auto run = [&](std::size_t s, bool fallback) {
    try {
      std::string warning;
      auto init = fallback ? random_partition_candidate(d, spec, static_cast<int>(s), opts)
                           : initial_candidate(data, d, spec, static_cast<int>(s), opts, &warning);
      if (!init) {
        notes[s] = fallback ? "random-partition start " + std::to_string(s + 1) + " skipped" : warning;
        return;
      }
      fits[s] = fit_em(data, *init, opts);
    } catch (const Error& e) {
      notes[s] = "start " + std::to_string(s + 1) + " failed: " + e.what();
    }
  };
  auto run_all = [&](bool fallback) {
    if (opts.parallel)
      parallel_for(fits.size(), [&](std::size_t s) { run(s, fallback); });
    else
      for (std::size_t s = 0; s < fits.size(); ++s) run(s, fallback);
  };
  run_all(false);
  bool fallback = std::none_of(fits.begin(), fits.end(), [](const auto& f) { return f.has_value(); });
  std::vector<std::string> extra;
  if (fallback) {
    for (auto& n : notes)
      if (!n.empty()) extra.push_back(n);
    std::fill(notes.begin(), notes.end(), std::string());
    run_all(true);
  }

  int best = -1;
  std::vector<double> logliks(fits.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t s = 0; s < fits.size(); ++s) {
    if (!fits[s]) continue;
    logliks[s] = fits[s]->loglik;
    if (best < 0 || fits[s]->loglik > fits[static_cast<std::size_t>(best)]->loglik) best = static_cast<int>(s);
  }
  if (best < 0) {
    std::string msg = "fit_multistart: all " + std::to_string(count) + " starts failed";
    for (const auto& n : extra) msg += "; " + n;
    for (const auto& n : notes)
      if (!n.empty()) msg += "; " + n;
    throw NumericalError(msg);
  }
  FitReport rep = std::move(*fits[static_cast<std::size_t>(best)]);
  rep.start_index = best;
  rep.start_logliks = std::move(logliks);
  if (fallback) rep.flags.push_back("no heuristic start survived; random-partition starts used");
  for (auto& n : extra) rep.flags.push_back(std::move(n));
  for (auto& n : notes)
    if (!n.empty()) rep.flags.push_back(std::move(n));
  return rep;
}

}  // namespace mmar
