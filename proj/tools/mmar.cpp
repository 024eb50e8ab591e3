// mmar: command-line front end.
//
// Exit codes: 0 ok, 2 usage, 3 data, 4 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmar/config.hpp"
#include "mmar/data_io.hpp"
#include "mmar/error.hpp"
#include "mmar/estimate.hpp"
#include "mmar/forecast.hpp"
#include "mmar/inference.hpp"
#include "mmar/model_io.hpp"
#include "mmar/replicate.hpp"
#include "mmar/rng.hpp"
#include "mmar/scenarios.hpp"
#include "mmar/selection.hpp"
#include "mmar/simulate.hpp"
#include "mmar/stationarity.hpp"
#include "mmar/theta.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mmar;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Shared run-configuration flags.
struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;
  std::string K, p, criterion, search;
  std::optional<std::uint64_t> seed;
  bool center = false, scale = false;

  void add(CLI::App* app, bool ranges) {
    app->add_option("--config", file, "key=value configuration file");
    app->add_option("--set", sets, "override one configuration key (key=value)");
    app->add_option("--K", K, ranges ? "component counts, e.g. 1:3 or 1,2" : "number of components");
    app->add_option("--p", p, ranges ? "orders, e.g. 1:2" : "autoregressive order");
    app->add_option("--seed", seed, "random seed");
    app->add_flag("--center", center, "center every scalar series");
    app->add_flag("--scale", scale, "unit pooled variance per row indicator");
    if (ranges) {
      app->add_option("--criterion", criterion, "aic, bic, hq or gic");
      app->add_option("--search", search, "grid or stepwise");
    }
  }

  RunConfig resolve() const {
    ConfigMap values;
    if (!file.empty()) merge_config(values, read_config_file(file));
    ConfigMap cli;
    for (const auto& s : sets) {
      ConfigMap layer;
      try {
        layer = parse_config_text(s, "--set");
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
      if (layer.empty()) throw UsageError("--set expects key=value, got '" + s + "'");
      merge_config(cli, layer);
    }
    if (!K.empty()) cli["K"] = K;
    if (!p.empty()) cli["p"] = p;
    if (!criterion.empty()) cli["criterion"] = criterion;
    if (!search.empty()) cli["search"] = search;
    if (seed) cli["seed"] = std::to_string(*seed);
    if (center) cli["center"] = "true";
    if (scale) cli["scale"] = "true";
    merge_config(values, cli);
    return make_config(values);
  }
};

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed) {
  if (!seed) throw UsageError("--seed is required for this command (or set seed in the config file)");
  return *seed;
}

void write_out(const fs::path& dir, const std::string& name, const std::string& contents) {
  fs::create_directories(dir);
  write_file_atomic(dir / name, contents);
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json transform_json(const Transform& tr) {
  return {{"mean", matrix_to_json(tr.mean)}, {"scale", vector_json(tr.scale)}};
}

Transform transform_from_json(const json& j) {
  try {
    Transform tr;
    tr.mean = matrix_from_json(j.at("mean"));
    const auto& s = j.at("scale");
    tr.scale.resize(static_cast<Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) tr.scale(static_cast<Index>(i)) = s[i].get<double>();
    if (tr.scale.size() != tr.mean.rows()) throw DataError("transform: scale length differs from row count");
    return tr;
  } catch (const json::exception& e) {
    throw DataError(std::string("transform: ") + e.what());
  }
}

json criteria_json(const Criteria& c) { return {{"aic", c.aic}, {"bic", c.bic}, {"hq", c.hq}, {"gic", c.gic}}; }

json string_list(const std::vector<std::string>& v) { return json(v); }

struct Prepared {
  DataFile file;
  Transform tr;
  MatrixSeries series;  // transformed
};

Prepared prepare(const std::string& path, const RunConfig& cfg) {
  Prepared p;
  p.file = read_data(path);
  p.tr = fit_transform(p.file.series, cfg.center, cfg.scale);
  p.series = apply_transform(p.tr, p.file.series);
  return p;
}

// Estimates with standard errors and 5% significance marks, per component.
std::string coefficient_table(const MmarModel& model, const InferenceReport* inf, double level) {
  const auto lay = ParamLayout::gamma(model.spec);
  const Vector g = pack_gamma(model);
  std::vector<WaldInterval> iv;
  if (inf) iv = gamma_wald_intervals(*inf, level);
  const Index m = model.spec.m;
  const Index n = model.spec.n;
  std::string out;
  auto block = [&](const std::string& title, Index start, Index rows, Index cols, bool sym) {
    out += "  " + title + "\n";
    Index pos = start;
    std::vector<std::vector<std::string>> cells(static_cast<std::size_t>(rows),
                                                std::vector<std::string>(static_cast<std::size_t>(cols)));
    for (Index j = 0; j < cols; ++j)
      for (Index i = sym ? j : 0; i < rows; ++i) {
        std::string c = fmt("%9.4f", g(pos));
        if (inf) c += fmt(" (%.4f)", inf->gamma_standard_errors(pos)) + " " + iv[static_cast<std::size_t>(pos)].mark;
        cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c;
        ++pos;
      }
    std::size_t width = 0;
    for (const auto& r : cells)
      for (const auto& c : r) width = std::max(width, c.size());
    for (const auto& r : cells) {
      out += "   ";
      for (const auto& c : r) out += " " + c + std::string(width - c.size(), ' ');
      out += "\n";
    }
  };
  for (int k = 0; k < model.spec.K(); ++k) {
    const auto& b = lay.comps[static_cast<std::size_t>(k)];
    out += "component " + std::to_string(k + 1) + "  alpha = " + fmt("%.4f", model.alphas[static_cast<std::size_t>(k)]);
    if (inf && model.spec.K() > 1) {
      const double se = k + 1 < model.spec.K() ? inf->standard_errors(ParamLayout::theta(model.spec).alpha + k)
                                                : inf->last_alpha_se;
      out += fmt(" (%.4f)", se);
    }
    out += "\n";
    for (std::size_t i = 0; i < b.a.size(); ++i) {
      block("A[" + std::to_string(k + 1) + "," + std::to_string(i + 1) + "]", b.a[i], m, m, false);
      block("B[" + std::to_string(k + 1) + "," + std::to_string(i + 1) + "]", b.b[i], n, n, false);
    }
    block("C[" + std::to_string(k + 1) + "]", b.c, m, n, false);
    block("U^-1[" + std::to_string(k + 1) + "] (lower triangle)", b.u, m, m, true);
    block("V^-1[" + std::to_string(k + 1) + "] (lower triangle)", b.v, n, n, true);
  }
  if (inf) out += "marks: + / - significant at 5%, 0 otherwise; standard errors in parentheses\n";
  return out;
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + fmt("%.17g", m(i, j));
    out += "\n";
  }
  return out;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string model, scenario, out;
  Index T = 0;
  int burn_in = kDefaultBurnIn;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& a) {
  const std::uint64_t seed = require_seed(a.seed);
  if (a.model.empty() == a.scenario.empty()) throw UsageError("simulate: give exactly one of --model or --scenario");
  const MmarModel model = a.model.empty() ? load_scenario(a.scenario) : load_model(a.model);
  const auto sim = simulate(model, a.T, a.burn_in, seed);
  const fs::path dir = a.out;
  write_out(dir, "data.csv", format_data(with_default_labels(sim.series)));
  write_out(dir, "labels.csv", format_labels(sim.labels));
  const json meta = {{"T", a.T}, {"burn_in", a.burn_in}, {"seed", seed}, {"rng", sim.rng},
                     {"model", a.model.empty() ? a.scenario : a.model}};
  write_out(dir, "simulate.json", meta.dump(2) + "\n");
  std::cout << "simulated T=" << a.T << " (m=" << model.spec.m << ", n=" << model.spec.n << ", K=" << model.spec.K()
            << ") -> " << (dir / "data.csv").string() << "\n";
  return 0;
}

// ---- fit --------------------------------------------------------------------

struct FitArgs {
  std::string data, init, out, info = "hessian";
  bool no_se = false;
  ConfigFlags cfg;
};

json fit_report_json(const FitReport& fit, const MatrixSeries& series, const Transform& tr, const RunConfig& cfg,
                     const InferenceReport* inf, const std::string& inf_error) {
  const Index dim = param_dim(fit.model.spec);
  json j;
  j["model"] = model_to_json(fit.model);
  j["loglik"] = fit.loglik;
  j["dim"] = dim;
  j["T"] = series.length();
  j["criteria"] = criteria_json(criteria(fit.loglik, dim, series.length(), fit.model.spec.p_max()));
  j["converged"] = fit.converged;
  j["n_iters"] = fit.n_iters;
  j["start_index"] = fit.start_index;
  json starts = json::array();
  for (double l : fit.start_logliks) starts.push_back(std::isfinite(l) ? json(l) : json(nullptr));
  j["start_logliks"] = starts;
  j["loglik_trace"] = fit.loglik_trace;
  j["flags"] = string_list(fit.flags);
  j["transform"] = transform_json(tr);
  j["rng"] = kRngName;
  j["config"] = format_config(cfg);
  if (inf) {
    j["theta"] = vector_json(inf->theta_hat.values);
    j["standard_errors"] = vector_json(inf->standard_errors);
    j["gamma"] = vector_json(theta_to_gamma(inf->theta_hat));
    j["gamma_standard_errors"] = vector_json(inf->gamma_standard_errors);
    j["last_alpha_se"] = inf->last_alpha_se;
    j["information_projected"] = inf->projected;
    j["inference_warnings"] = string_list(inf->warnings);
    json ci = json::array();
    for (const auto& w : gamma_wald_intervals(*inf, cfg.level))
      ci.push_back({{"estimate", w.estimate}, {"lo", w.lo}, {"hi", w.hi}, {"mark", std::string(1, w.mark)}});
    j["gamma_intervals"] = ci;
    j["level"] = cfg.level;
  } else if (!inf_error.empty()) {
    j["inference_error"] = inf_error;
  }
  return j;
}

int run_fit(const FitArgs& a) {
  const RunConfig cfg = a.cfg.resolve();
  const std::uint64_t seed = require_seed(cfg.seed);
  (void)seed;
  if (cfg.K.size() != 1 || cfg.p.size() != 1) throw UsageError("fit: K and p must be single values (use select)");
  const Prepared d = prepare(a.data, cfg);
  const MmarSpec spec = MmarSpec::uniform(d.series.rows(), d.series.cols(), cfg.K[0], cfg.p[0]);
  FitReport fit;
  if (!a.init.empty()) {
    const MmarModel init = load_model(a.init);
    if (!(init.spec == spec)) throw UsageError("fit: --init model does not match K, p and the data dimensions");
    fit = fit_em(d.series, init, cfg.em);
  } else {
    fit = fit_multistart(d.series, spec, cfg.em);
  }
  std::optional<InferenceReport> inf;
  std::string inf_error;
  if (!a.no_se) {
    if (a.info != "hessian" && a.info != "opg") throw UsageError("fit: --info must be hessian or opg");
    try {
      inf = infer(fit.model, d.series, a.info == "opg" ? InfoMethod::outer_product : InfoMethod::numeric_hessian);
    } catch (const NumericalError& e) {
      inf_error = e.what();
    }
  }
  const json report = fit_report_json(fit, d.series, d.tr, cfg, inf ? &*inf : nullptr, inf_error);
  const std::string table = coefficient_table(fit.model, inf ? &*inf : nullptr, cfg.level);
  std::cout << "MMAR(" << spec.K() << ";" << cfg.p[0] << ")  loglik " << fmt("%.4f", fit.loglik) << "  dim "
            << report["dim"].get<Index>() << "  BIC " << fmt("%.2f", report["criteria"]["bic"].get<double>())
            << (fit.converged ? "" : "  (not converged)") << "\n"
            << table;
  if (!inf_error.empty()) std::cout << "inference failed: " << inf_error << "\n";
  for (const auto& f : fit.flags) std::cout << "note: " << f << "\n";
  if (!a.out.empty()) {
    const fs::path dir = a.out;
    write_out(dir, "fit.json", report.dump(2) + "\n");
    write_out(dir, "model.json", model_to_json(fit.model).dump(2) + "\n");
    write_out(dir, "coefficients.txt", table);
    std::vector<std::string> hdr;
    for (int k = 0; k < spec.K(); ++k) hdr.push_back("tau" + std::to_string(k + 1));
    write_out(dir, "responsibilities.csv", matrix_csv(fit.responsibilities, hdr));
  }
  return 0;
}

// ---- select -----------------------------------------------------------------

struct SelectArgs {
  std::string data, out;
  ConfigFlags cfg;
};

int run_select(const SelectArgs& a) {
  const RunConfig cfg = a.cfg.resolve();
  require_seed(cfg.seed);
  const Prepared d = prepare(a.data, cfg);
  const Criterion which = parse_criterion(cfg.criterion);
  const SelectionResult sel = cfg.search == "stepwise" ? select_stepwise(d.series, cfg.K, cfg.p, which, cfg.em)
                                                       : select_grid(d.series, cfg.K, cfg.p, which, cfg.em);
  std::string csv = "K,p,dim,status,loglik,aic,bic,hq,gic\n";
  std::string text = "   K   p   dim        loglik          AIC          BIC           HQ          GIC\n";
  for (std::size_t i = 0; i < sel.table.size(); ++i) {
    const auto& r = sel.table[i];
    csv += std::to_string(r.K) + "," + std::to_string(r.p) + "," + std::to_string(r.dim) + "," +
           (r.ok ? "ok" : "failed");
    char line[256];
    if (r.ok) {
      for (double v : {r.loglik, r.crit.aic, r.crit.bic, r.crit.hq, r.crit.gic}) csv += "," + fmt("%.17g", v);
      std::snprintf(line, sizeof line, "%4d%4d%6ld%14.3f%13.3f%13.3f%13.3f%13.3f%s\n", r.K, r.p,
                    static_cast<long>(r.dim), r.loglik, r.crit.aic, r.crit.bic, r.crit.hq, r.crit.gic,
                    static_cast<int>(i) == sel.winner ? "  *" : "");
    } else {
      csv += ",,,,,";
      std::snprintf(line, sizeof line, "%4d%4d%6ld  failed: %s\n", r.K, r.p, static_cast<long>(r.dim),
                    r.status.c_str());
    }
    csv += "\n";
    text += line;
  }
  const auto& w = sel.table[static_cast<std::size_t>(sel.winner)];
  text += "selected by " + criterion_name(which) + " (" + cfg.search + "): K=" + std::to_string(w.K) +
          ", p=" + std::to_string(w.p) + " (" + std::to_string(sel.n_fits) + " fits)\n";
  std::cout << text;
  if (!a.out.empty()) {
    const fs::path dir = a.out;
    write_out(dir, "selection.csv", csv);
    json j = {{"criterion", criterion_name(which)},
              {"search", cfg.search},
              {"winner", {{"K", w.K}, {"p", w.p}, {"dim", w.dim}, {"loglik", w.loglik}}},
              {"n_fits", sel.n_fits},
              {"transform", transform_json(d.tr)},
              {"rng", kRngName}};
    if (sel.winner_fit) j["model"] = model_to_json(sel.winner_fit->model);
    write_out(dir, "selection.json", j.dump(2) + "\n");
    if (sel.winner_fit) write_out(dir, "model.json", model_to_json(sel.winner_fit->model).dump(2) + "\n");
  }
  return 0;
}

// ---- predict ----------------------------------------------------------------

struct PredictArgs {
  std::string model, data, transform_from, out;
  double level = 0.95;
  int grid = kDefaultGridSize;
};

int run_predict(const PredictArgs& a) {
  const MmarModel model = load_model(a.model);
  const DataFile file = read_data(a.data);
  Transform tr{Matrix::Zero(file.series.rows(), file.series.cols()), Vector::Ones(file.series.rows())};
  if (!a.transform_from.empty()) {
    const json j = json::parse(read_file(a.transform_from), nullptr, false);
    if (j.is_discarded() || !j.contains("transform")) throw DataError(a.transform_from + ": no transform object");
    tr = transform_from_json(j.at("transform"));
  }
  if (tr.mean.rows() != file.series.rows() || tr.mean.cols() != file.series.cols())
    throw DimensionError("predict: transform does not match the data dimensions");
  const MatrixSeries series = apply_transform(tr, file.series);
  if (model.spec.m != series.rows() || model.spec.n != series.cols())
    throw DimensionError("predict: model does not match the data dimensions");
  const int p = model.spec.p_max();
  const Index T = series.length();
  if (T < p) throw DimensionError("predict: need at least p_max observations");
  std::vector<Matrix> lags;
  for (Index t = T - p; t < T; ++t) lags.emplace_back(series.at(t));
  const Matrix mean = invert_transform(tr, conditional_mean(model, lags));

  // In-sample one-step fitted values.
  std::vector<Matrix> fitted, actual;
  for (Index t = p; t < T; ++t) {
    std::vector<Matrix> w;
    for (Index s = t - p; s < t; ++s) w.emplace_back(series.at(s));
    fitted.push_back(invert_transform(tr, conditional_mean(model, w)));
    actual.emplace_back(file.series.at(t));
  }
  const double in_mspe = fitted.empty() ? std::nan("") : mspe(fitted, actual);

  json marg = json::array();
  std::string dens = "row,col,x,density\n";
  std::cout << "one-step forecast at t=" << T + 1 << " (" << fmt("%.0f%%", 100 * a.level) << " HDR)\n";
  for (Index i = 0; i < model.spec.m; ++i)
    for (Index j = 0; j < model.spec.n; ++j) {
      const PredictiveMarginal pm = predictive_marginal(model, lags, i, j, a.level, a.grid);
      const double s = tr.scale(i);
      const double mu = tr.mean(i, j);
      json iv = json::array();
      std::string ivs;
      for (const auto& h : pm.hdr) {
        iv.push_back({s * h.lo + mu, s * h.hi + mu});
        ivs += " [" + fmt("%.4f", s * h.lo + mu) + ", " + fmt("%.4f", s * h.hi + mu) + "]";
      }
      const auto& rl = file.row_labels[static_cast<std::size_t>(i)];
      const auto& cl = file.col_labels[static_cast<std::size_t>(j)];
      marg.push_back({{"row", rl}, {"col", cl}, {"mean", mean(i, j)}, {"hdr", iv}, {"hdr_mass", pm.hdr_mass},
                      {"weights", pm.weights}});
      for (Index g = 0; g < pm.grid.size(); ++g)
        dens += rl + "," + cl + "," + fmt("%.10g", s * pm.grid(g) + mu) + "," + fmt("%.10g", pm.density(g) / s) + "\n";
      std::cout << "  " << rl << "," << cl << "  mean " << fmt("%9.4f", mean(i, j)) << "  HDR" << ivs << "\n";
    }
  std::cout << "in-sample one-step MSPE " << fmt("%.6f", in_mspe) << "\n";
  if (!a.out.empty()) {
    const fs::path dir = a.out;
    json j = {{"t", T + 1}, {"level", a.level}, {"mean", matrix_to_json(mean)}, {"marginals", marg},
              {"in_sample_mspe", in_mspe}};
    write_out(dir, "forecast.json", j.dump(2) + "\n");
    write_out(dir, "density.csv", dens);
    const Residuals res = residuals(model, series);
    std::string rc = "t,label";
    for (Index c = 0; c < series.cols(); ++c)
      for (Index r = 0; r < series.rows(); ++r)
        rc += "," + file.row_labels[static_cast<std::size_t>(r)] + ":" + file.col_labels[static_cast<std::size_t>(c)];
    rc += "\n";
    for (Index t = 0; t < res.residuals.length(); ++t) {
      rc += std::to_string(t + p + 1) + "," + std::to_string(res.labels[static_cast<std::size_t>(t)]);
      const Matrix e = res.residuals.at(t);
      for (Index c = 0; c < e.cols(); ++c)
        for (Index r = 0; r < e.rows(); ++r) rc += "," + fmt("%.10g", e(r, c));
      rc += "\n";
    }
    write_out(dir, "residuals.csv", rc);
  }
  return 0;
}

// ---- diagnose ---------------------------------------------------------------

struct DiagnoseArgs {
  std::string model, out;
  bool stationarity = false, lyapunov = false;
  int horizon = kDefaultLyapunovHorizon, reps = kDefaultLyapunovReplications;
  std::vector<double> qs{2.0, 4.0, 6.0};
  std::optional<std::uint64_t> seed;
};

int run_diagnose(const DiagnoseArgs& a) {
  if (!a.stationarity) throw UsageError("diagnose: nothing to do (pass --stationarity)");
  const MmarModel model = load_model(a.model);
  StationarityOptions so;
  so.qs = a.qs;
  so.lyapunov = a.lyapunov;
  so.horizon = a.horizon;
  so.replications = a.reps;
  if (a.lyapunov) so.seed = require_seed(a.seed);
  const StationarityReport r = stationarity_report(model, so);
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  std::ostringstream o;
  o << "component spectral radii rho(Phi_k):";
  for (double v : r.component_radii) o << " " << fmt("%.4f", v);
  o << "\n";
  if (r.companion_extension) o << "note: orders > 1, mean and second-order checks use companion matrices\n";
  o << "mean stationary:          " << yn(r.mean.holds) << "  rho(sum alpha_k Phi_k) = " << fmt("%.4f", r.mean.value)
    << "\n";
  if (r.second_order)
    o << "second-order stationary:  " << yn(r.second_order->holds)
      << "  rho(sum alpha_k Phi_k (x) Phi_k) = " << fmt("%.4f", r.second_order->value)
      << (r.second_order_note.empty() ? "" : "  (" + r.second_order_note + ")") << "\n";
  else
    o << "second-order stationary:  skipped (" << r.second_order_note << ")\n";
  o << "strict (sufficient):      " << yn(r.strict.holds) << "  sum alpha_k log rho(Phi_k) = "
    << fmt("%.4f", r.strict.value) << "\n";
  if (r.strict_simplified) o << "  via rho(B) rho(A):       " << fmt("%.4f", *r.strict_simplified) << "\n";
  for (const auto& q : r.qth)
    o << "q = " << fmt("%g", q.q) << " moment (sufficient): " << yn(q.holds) << "  sum alpha_k rho^q = "
      << fmt("%.4f", q.weighted) << "  (unweighted " << fmt("%.4f", q.unweighted) << ")\n";
  if (r.lyapunov)
    o << "top Lyapunov exponent:    " << fmt("%.5f", r.lyapunov->gamma) << " (se " << fmt("%.5f", r.lyapunov->se)
      << ", horizon " << r.lyapunov->horizon << ", " << r.lyapunov->replications << " replications)\n";
  std::cout << o.str();
  if (!a.out.empty()) {
    json j;
    j["component_radii"] = r.component_radii;
    j["mean_stationary"] = {{"holds", r.mean.holds}, {"value", r.mean.value}};
    if (r.second_order)
      j["second_order_stationary"] = {{"holds", r.second_order->holds}, {"value", r.second_order->value}};
    else
      j["second_order_stationary"] = {{"skipped", r.second_order_note}};
    j["companion_extension"] = r.companion_extension;
    j["strict_sufficient"] = {{"holds", r.strict.holds},
                              {"value", std::isfinite(r.strict.value) ? json(r.strict.value) : json("-inf")}};
    json q = json::object();
    for (const auto& m : r.qth)
      q[fmt("%g", m.q)] = {{"holds", m.holds}, {"value", m.weighted}, {"unweighted", m.unweighted}};
    j["qth_moment_sufficient"] = q;
    if (r.lyapunov)
      j["lyapunov_estimate"] = {{"gamma", r.lyapunov->gamma}, {"se", r.lyapunov->se}, {"horizon", r.lyapunov->horizon},
                                {"replications", r.lyapunov->replications}, {"seed", so.seed}};
    write_out(a.out, "stationarity.json", j.dump(2) + "\n");
  }
  return 0;
}

// ---- replicate --------------------------------------------------------------

struct ReplicateArgs {
  std::string scenario, experiment = "coverage", out, K = "1:3", p;
  int reps = 0;
  Index T = 0;
  double level = 0.95;
  bool regenerate = false;
  std::optional<std::uint64_t> seed;
};

int run_replicate(const ReplicateArgs& a) {
  const std::uint64_t seed = require_seed(a.seed);
  if (a.reps < 1) throw UsageError("replicate: --reps must be >= 1");
  const MmarModel truth = a.regenerate ? generate_scenario(scenario_spec(a.scenario)) : load_scenario(a.scenario);
  std::ostringstream o;
  json j = {{"scenario", a.scenario}, {"experiment", a.experiment}, {"reps", a.reps}, {"T", a.T}, {"seed", seed},
            {"rng", kRngName}};
  std::string csv;
  if (a.experiment == "coverage") {
    const CoverageResult c = coverage_experiment(truth, a.T, a.reps, seed, a.level);
    o << "coverage of nominal " << fmt("%.0f%%", 100 * a.level) << " intervals, " << a.scenario << ", T=" << a.T
      << ", " << (a.reps - c.failed) << "/" << a.reps << " replications\n";
    csv = "quantity,coverage\n";
    for (std::size_t i = 0; i < c.block_names.size(); ++i) {
      o << "  " << c.block_names[i] << " entries (element-wise)  " << fmt("%.3f", c.block_coverage[i]) << "\n";
      csv += c.block_names[i] + "," + fmt("%.6f", c.block_coverage[i]) + "\n";
    }
    for (std::size_t k = 0; k < c.xi_coverage.size(); ++k) {
      o << "  xi_" << k + 1 << " (joint ellipse)           " << fmt("%.3f", c.xi_coverage[k]) << "\n";
      csv += "xi" + std::to_string(k + 1) + "," + fmt("%.6f", c.xi_coverage[k]) + "\n";
    }
    o << "  all xi jointly                  " << fmt("%.3f", c.xi_all_coverage) << "\n"
      << "  all theta entries (mean)        " << fmt("%.3f", c.mean_coverage) << "\n";
    csv += "xi_all," + fmt("%.6f", c.xi_all_coverage) + "\ntheta_mean," + fmt("%.6f", c.mean_coverage) + "\n";
    j["block_names"] = c.block_names;
    j["block_coverage"] = c.block_coverage;
    j["xi_coverage"] = c.xi_coverage;
    j["xi_all_coverage"] = c.xi_all_coverage;
    j["mean_coverage"] = c.mean_coverage;
    j["failed"] = c.failed;
    j["failures"] = c.failures;
    for (const auto& f : c.failures) o << "  failed: " << f << "\n";
  } else if (a.experiment == "selection" || a.experiment == "stepwise") {
    const auto Ks = parse_int_list(a.K, "K");
    const bool step = a.experiment == "stepwise";
    const auto ps = a.p.empty() ? std::vector<int>{step ? 1 : truth.spec.p_max()} : parse_int_list(a.p, "p");
    if (step && a.p.empty()) throw UsageError("replicate stepwise: give the order range with --p");
    const SelectionRates r = step ? stepwise_experiment(truth, a.T, a.reps, seed, Ks, ps)
                                  : selection_experiment(truth, a.T, a.reps, seed, Ks);
    o << (step ? "stepwise" : "grid") << " selection, " << a.scenario << " (true K=" << truth.spec.K()
      << ", p=" << truth.spec.p_max() << "), T=" << a.T << ", " << (a.reps - r.failed) << "/" << a.reps
      << " replications\n  criterion  correct K  correct (K,p)   picks of K";
    o << "\n";
    csv = "criterion,correct_K,correct_K_p";
    for (int K : Ks) csv += ",picked_K" + std::to_string(K);
    csv += "\n";
    json rows = json::array();
    for (std::size_t c = 0; c < r.criteria.size(); ++c) {
      std::string counts;
      json pick = json::object();
      csv += r.criteria[c] + "," + fmt("%.6f", r.correct_rate[c]) + "," + fmt("%.6f", r.joint_rate[c]);
      for (int K : Ks) {
        int n = 0;
        for (int v : r.picks[c]) n += v == K;
        counts += " K" + std::to_string(K) + ":" + std::to_string(n);
        pick[std::to_string(K)] = n;
        csv += "," + std::to_string(n);
      }
      csv += "\n";
      char line[128];
      std::snprintf(line, sizeof line, "  %-9s  %9.3f  %13.3f  ", r.criteria[c].c_str(), r.correct_rate[c],
                    r.joint_rate[c]);
      o << line << counts << "\n";
      rows.push_back({{"criterion", r.criteria[c]}, {"correct_K", r.correct_rate[c]}, {"correct_K_p", r.joint_rate[c]},
                      {"picks", pick}});
    }
    j["rates"] = rows;
    j["failed"] = r.failed;
    j["failures"] = r.failures;
    for (const auto& f : r.failures) o << "  note: " << f << "\n";
  } else {
    throw UsageError("replicate: --experiment must be coverage, selection or stepwise");
  }
  std::cout << o.str();
  if (!a.out.empty()) {
    write_out(a.out, "replicate.json", j.dump(2) + "\n");
    write_out(a.out, "replicate.csv", csv);
  }
  return 0;
}

// ---- scenario ---------------------------------------------------------------

struct ScenarioArgs {
  std::string name, out;
  std::optional<std::uint64_t> seed;
  bool check = false;
};

int run_scenario(const ScenarioArgs& a) {
  ScenarioSpec s = scenario_spec(a.name);
  if (a.seed) s.seed = *a.seed;
  const MmarModel model = generate_scenario(s);
  std::cout << a.name << ": m=" << s.spec.m << " n=" << s.spec.n << " K=" << s.spec.K() << " p=" << s.spec.p_max()
            << " seed=" << s.seed << "\n  radii";
  for (int k = 0; k < model.spec.K(); ++k) std::cout << " " << fmt("%.4f", spectral_radius(companion_matrix(model, k)));
  std::cout << "  sum alpha rho^6 = " << fmt("%.4f", check_qth_moment(model, 6.0).weighted) << "\n";
  if (a.check) {
    const MmarModel frozen = load_scenario(a.name);
    const bool same = model_to_json(frozen).dump() == model_to_json(model).dump();
    std::cout << "  frozen file " << (scenario_dir() / (a.name + ".json")).string() << ": "
              << (same ? "identical" : "DIFFERS") << "\n";
    if (!same) return kExitNumerical;
  }
  if (!a.out.empty()) save_model(model, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmar: mixture matrix autoregressive models"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "simulate a series from a model file or frozen scenario");
  c_sim->add_option("--model", sim.model, "model JSON");
  c_sim->add_option("--scenario", sim.scenario, "frozen scenario name");
  c_sim->add_option("--T", sim.T, "series length")->required()->check(CLI::PositiveNumber);
  c_sim->add_option("--burn-in", sim.burn_in, "discarded warm-up draws")->check(CLI::NonNegativeNumber);
  c_sim->add_option("--seed", sim.seed, "random seed");
  c_sim->add_option("--out", sim.out, "output directory")->required();

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "maximum-likelihood fit by EM with standard errors");
  c_fit->add_option("--data", fit.data, "long CSV t,row,col,value")->required();
  c_fit->add_option("--init", fit.init, "start EM from this model instead of the multistart");
  c_fit->add_option("--info", fit.info, "information estimate: hessian or opg");
  c_fit->add_flag("--no-se", fit.no_se, "skip standard errors");
  c_fit->add_option("--out", fit.out, "output directory");
  fit.cfg.add(c_fit, false);

  SelectArgs sel;
  auto* c_sel = app.add_subcommand("select", "information-criterion model selection");
  c_sel->add_option("--data", sel.data, "long CSV t,row,col,value")->required();
  c_sel->add_option("--out", sel.out, "output directory");
  sel.cfg.add(c_sel, true);

  PredictArgs pre;
  auto* c_pre = app.add_subcommand("predict", "one-step predictive means, densities and HDRs");
  c_pre->add_option("--model", pre.model, "model JSON")->required();
  c_pre->add_option("--data", pre.data, "long CSV t,row,col,value")->required();
  c_pre->add_option("--transform-from", pre.transform_from, "fit.json whose stored transform maps the data");
  c_pre->add_option("--level", pre.level, "HDR level")->check(CLI::Range(0.0, 1.0));
  c_pre->add_option("--grid", pre.grid, "density grid points")->check(CLI::Range(16, 1 << 22));
  c_pre->add_option("--out", pre.out, "output directory");

  DiagnoseArgs dia;
  auto* c_dia = app.add_subcommand("diagnose", "stationarity diagnostics of a model");
  c_dia->add_option("--model", dia.model, "model JSON")->required();
  c_dia->add_flag("--stationarity", dia.stationarity, "spectral-radius, moment and strict criteria");
  c_dia->add_flag("--lyapunov", dia.lyapunov, "Monte-Carlo top Lyapunov exponent");
  c_dia->add_option("--horizon", dia.horizon, "Lyapunov product length")->check(CLI::PositiveNumber);
  c_dia->add_option("--reps", dia.reps, "Lyapunov replications")->check(CLI::Range(2, 1 << 20));
  c_dia->add_option("--q", dia.qs, "moment orders");
  c_dia->add_option("--seed", dia.seed, "random seed (Lyapunov)");
  c_dia->add_option("--out", dia.out, "output directory");

  ReplicateArgs rep;
  auto* c_rep = app.add_subcommand("replicate", "Monte-Carlo replication of a scenario");
  c_rep->add_option("--scenario", rep.scenario, "scenario1..scenario4")->required();
  c_rep->add_option("--experiment", rep.experiment, "coverage, selection or stepwise");
  c_rep->add_option("--reps", rep.reps, "replications")->required();
  c_rep->add_option("--T", rep.T, "series length")->required()->check(CLI::PositiveNumber);
  c_rep->add_option("--K", rep.K, "candidate K values");
  c_rep->add_option("--p", rep.p, "candidate orders");
  c_rep->add_option("--level", rep.level, "interval level")->check(CLI::Range(0.0, 1.0));
  c_rep->add_flag("--regenerate", rep.regenerate, "regenerate the scenario instead of loading the frozen file");
  c_rep->add_option("--seed", rep.seed, "random seed");
  c_rep->add_option("--out", rep.out, "output directory");

  ScenarioArgs scn;
  auto* c_scn = app.add_subcommand("scenario", "generate scenario parameters");
  c_scn->add_option("--name", scn.name, "scenario1..scenario4")->required();
  c_scn->add_option("--seed", scn.seed, "override the scenario seed");
  c_scn->add_flag("--check", scn.check, "compare with the frozen file");
  c_scn->add_option("--out", scn.out, "write the model JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_fit) return run_fit(fit);
    if (*c_sel) return run_select(sel);
    if (*c_pre) return run_predict(pre);
    if (*c_dia) return run_diagnose(dia);
    if (*c_rep) return run_replicate(rep);
    if (*c_scn) return run_scenario(scn);
  } catch (const UsageError& e) {
    std::cerr << "mmar: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    std::cerr << "mmar: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "mmar: " << e.what() << "\n";
    return kExitData;
  } catch (const DimensionError& e) {
    std::cerr << "mmar: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "mmar: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "mmar: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "mmar: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
