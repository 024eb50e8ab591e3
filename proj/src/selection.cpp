#include "mmar/selection.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mmar/error.hpp"
#include "mmar/parallel.hpp"
#include "mmar/theta.hpp"

namespace mmar {

Criterion parse_criterion(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "aic") return Criterion::aic;
  if (s == "bic") return Criterion::bic;
  if (s == "hq") return Criterion::hq;
  if (s == "gic") return Criterion::gic;
  throw InvalidParameter("unknown criterion '" + name + "' (expected aic, bic, hq or gic)");
}

std::string criterion_name(Criterion c) {
  switch (c) {
    case Criterion::aic: return "AIC";
    case Criterion::bic: return "BIC";
    case Criterion::hq: return "HQ";
    case Criterion::gic: return "GIC";
  }
  return "?";
}

double criterion_value(const Criteria& c, Criterion which) {
  switch (which) {
    case Criterion::aic: return c.aic;
    case Criterion::bic: return c.bic;
    case Criterion::hq: return c.hq;
    case Criterion::gic: return c.gic;
  }
  return c.bic;
}

Criteria criteria(double loglik, Index dim, Index T, int p_max) {
  const Index n_eff = T - p_max;
  if (n_eff < 3) throw InvalidParameter("criteria: T - p_max must be at least 3");
  if (dim < 1) throw InvalidParameter("criteria: dim must be positive");
  const double n = static_cast<double>(n_eff);
  const double d = static_cast<double>(dim);
  const double base = -2.0 * loglik;
  const double ll = std::log(std::log(n));
  return {base + 2.0 * d, base + std::log(n) * d, base + 2.0 * ll * d, base + ll * std::log(d) * d};
}

int select_winner(const std::vector<SelectionRow>& rows, Criterion which) {
  int best = -1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].ok) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const auto& b = rows[static_cast<std::size_t>(best)];
    const double vi = criterion_value(rows[i].crit, which);
    const double vb = criterion_value(b.crit, which);
    if (vi < vb || (vi == vb && rows[i].dim < b.dim)) best = static_cast<int>(i);
  }
  return best;
}

namespace {

struct CellFit {
  SelectionRow row;
  std::optional<FitReport> fit;
};

CellFit fit_cell(const MatrixSeries& data, int K, int p, const EmOptions& opts) {
  CellFit out;
  out.row.K = K;
  out.row.p = p;
  MmarSpec spec = MmarSpec::uniform(data.rows(), data.cols(), K, p);
  out.row.dim = param_dim(spec);
  try {
    FitReport r = fit_multistart(data, spec, opts);
    out.row.loglik = r.loglik;
    out.row.crit = criteria(r.loglik, out.row.dim, data.length(), p);
    out.row.ok = std::isfinite(r.loglik);
    out.row.status = out.row.ok ? "ok" : "non-finite log-likelihood";
    out.fit = std::move(r);
  } catch (const Error& e) {
    out.row.ok = false;
    out.row.status = e.what();
  }
  return out;
}

void check_ranges(const std::vector<int>& Ks, const std::vector<int>& ps) {
  if (Ks.empty() || ps.empty()) throw InvalidParameter("selection: K and p ranges must be non-empty");
  for (int k : Ks)
    if (k < 1) throw InvalidParameter("selection: K values must be >= 1");
  for (int p : ps)
    if (p < 1) throw InvalidParameter("selection: p values must be >= 1");
}

}  // namespace

SelectionResult select_grid(const MatrixSeries& data, const std::vector<int>& Ks, const std::vector<int>& ps,
                            Criterion which, const EmOptions& opts) {
  check_ranges(Ks, ps);
  std::vector<std::pair<int, int>> cells;
  for (int K : Ks)
    for (int p : ps) cells.emplace_back(K, p);
  std::vector<CellFit> fits(cells.size());
  EmOptions inner = opts;
  inner.parallel = false;
  auto body = [&](std::size_t i) { fits[i] = fit_cell(data, cells[i].first, cells[i].second, inner); };
  if (opts.parallel)
    parallel_for(cells.size(), body);
  else
    for (std::size_t i = 0; i < cells.size(); ++i) body(i);

  SelectionResult res;
  for (auto& f : fits) res.table.push_back(f.row);
  res.n_fits = static_cast<int>(cells.size());
  res.winner = select_winner(res.table, which);
  if (res.winner < 0) throw NumericalError("select_grid: every fit failed");
  res.winner_fit = std::move(fits[static_cast<std::size_t>(res.winner)].fit);
  return res;
}

SelectionResult select_stepwise(const MatrixSeries& data, const std::vector<int>& Ks, const std::vector<int>& ps,
                                Criterion which, const EmOptions& opts) {
  check_ranges(Ks, ps);
  const int p1 = std::find(ps.begin(), ps.end(), 1) != ps.end() ? 1 : *std::min_element(ps.begin(), ps.end());
  std::map<std::pair<int, int>, CellFit> cache;
  SelectionResult res;
  auto get = [&](int K, int p) -> CellFit& {
    auto it = cache.find({K, p});
    if (it == cache.end()) {
      it = cache.emplace(std::make_pair(K, p), fit_cell(data, K, p, opts)).first;
      res.table.push_back(it->second.row);
      ++res.n_fits;
    }
    return it->second;
  };

  std::vector<SelectionRow> stage1;
  for (int K : Ks) stage1.push_back(get(K, p1).row);
  const int w1 = select_winner(stage1, which);
  if (w1 < 0) throw NumericalError("select_stepwise: every stage-1 fit failed");
  const int K_sel = stage1[static_cast<std::size_t>(w1)].K;

  std::vector<SelectionRow> stage2;
  for (int p : ps) stage2.push_back(get(K_sel, p).row);
  const int w2 = select_winner(stage2, which);
  const auto& win = stage2[static_cast<std::size_t>(w2)];
  for (std::size_t i = 0; i < res.table.size(); ++i)
    if (res.table[i].K == win.K && res.table[i].p == win.p) res.winner = static_cast<int>(i);
  res.winner_fit = std::move(cache.at({win.K, win.p}).fit);
  return res;
}

}  // namespace mmar
