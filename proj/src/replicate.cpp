#include "mmar/replicate.hpp"

#include <algorithm>
#include <map>

#include "mmar/error.hpp"
#include "mmar/inference.hpp"
#include "mmar/parallel.hpp"
#include "mmar/rng.hpp"
#include "mmar/simulate.hpp"
#include "mmar/theta.hpp"

namespace mmar {

CoverageResult coverage_experiment(const MmarModel& truth_in, Index T, int reps, std::uint64_t seed, double level,
                                   const EmOptions& opts_in, int burn_in) {
  if (reps < 1) throw InvalidParameter("coverage_experiment: reps must be >= 1");
  const MmarModel truth = normalize(truth_in);
  const ThetaVector theta0 = pack_theta(truth);
  const auto lay = ParamLayout::theta(truth.spec);
  const int K = truth.spec.K();
  EmOptions opts = opts_in;
  opts.parallel = false;

  struct Rep {
    bool ok = false;
    std::string error;
    std::vector<bool> covered;  // per theta entry
    std::vector<bool> xi;
    bool xi_all = false;
  };
  std::vector<Rep> out(static_cast<std::size_t>(reps));
  std::vector<Index> all_xi;
  for (int k = 0; k < K; ++k)
    for (Index i : lay.xi(k)) all_xi.push_back(i);

  parallel_for(out.size(), [&](std::size_t r) {
    Rep& rep = out[r];
    try {
      const auto sim = simulate(truth, T, burn_in, sub_seed(seed, r));
      const FitReport fit = fit_em(sim.series, truth, opts);
      const InferenceReport inf = infer(fit.model, sim.series);
      const auto iv = wald_intervals(inf, level);
      for (std::size_t j = 0; j < iv.size(); ++j)
        rep.covered.push_back(iv[j].lo <= theta0.values(static_cast<Index>(j)) &&
                              theta0.values(static_cast<Index>(j)) <= iv[j].hi);
      for (int k = 0; k < K; ++k) rep.xi.push_back(joint_ellipse_test(inf, lay.xi(k), level, theta0.values));
      rep.xi_all = joint_ellipse_test(inf, all_xi, level, theta0.values);
      rep.ok = true;
    } catch (const Error& e) {
      rep.error = "rep " + std::to_string(r + 1) + ": " + e.what();
    }
  });

  CoverageResult res;
  res.reps = reps;
  res.level = level;
  for (int k = 0; k < K; ++k)
    for (std::size_t i = 0; i < lay.comps[static_cast<std::size_t>(k)].a.size(); ++i)
      res.block_names.push_back("A[" + std::to_string(k + 1) + "," + std::to_string(i + 1) + "]");
  res.block_coverage.assign(res.block_names.size(), 0.0);
  res.xi_coverage.assign(static_cast<std::size_t>(K), 0.0);
  const Index m = truth.spec.m;
  int ok = 0;
  double all_hits = 0.0;
  for (const auto& rep : out) {
    if (!rep.ok) {
      ++res.failed;
      res.failures.push_back(rep.error);
      continue;
    }
    ++ok;
    std::size_t bi = 0;
    for (int k = 0; k < K; ++k)
      for (Index start : lay.comps[static_cast<std::size_t>(k)].a) {
        double hits = 0.0;
        for (Index j = 0; j < m * m; ++j) hits += rep.covered[static_cast<std::size_t>(start + j)];
        res.block_coverage[bi++] += hits / static_cast<double>(m * m);
      }
    for (int k = 0; k < K; ++k) res.xi_coverage[static_cast<std::size_t>(k)] += rep.xi[static_cast<std::size_t>(k)];
    res.xi_all_coverage += rep.xi_all;
    double h = 0.0;
    for (bool c : rep.covered) h += c;
    all_hits += h / static_cast<double>(rep.covered.size());
  }
  if (ok > 0) {
    for (double& c : res.block_coverage) c /= ok;
    for (double& c : res.xi_coverage) c /= ok;
    res.xi_all_coverage /= ok;
    res.mean_coverage = all_hits / ok;
    res.a11_coverage = res.block_coverage.front();
  }
  return res;
}

namespace {

const std::vector<Criterion> kAll{Criterion::aic, Criterion::bic, Criterion::hq, Criterion::gic};

SelectionRates make_rates(int reps, bool stepwise) {
  SelectionRates r;
  r.reps = reps;
  r.stepwise = stepwise;
  for (Criterion c : kAll) r.criteria.push_back(criterion_name(c));
  r.correct_rate.assign(kAll.size(), 0.0);
  r.picks.assign(kAll.size(), std::vector<int>(static_cast<std::size_t>(reps), 0));
  r.p_picks = r.picks;
  return r;
}

void finish_rates(SelectionRates& r, int true_k, int true_p, const std::vector<std::string>& errors) {
  const int ok = r.reps - r.failed;
  for (const auto& e : errors)
    if (!e.empty()) r.failures.push_back(e);
  for (std::size_t c = 0; c < r.picks.size(); ++c) {
    int hits = 0;
    for (int k : r.picks[c]) hits += k == true_k;
    r.correct_rate[c] = ok > 0 ? static_cast<double>(hits) / ok : 0.0;
    int both = 0;
    for (std::size_t i = 0; i < r.picks[c].size(); ++i) both += r.picks[c][i] == true_k && r.p_picks[c][i] == true_p;
    r.joint_rate.push_back(ok > 0 ? static_cast<double>(both) / ok : 0.0);
  }
}

}  // namespace

SelectionRates selection_experiment(const MmarModel& truth, Index T, int reps, std::uint64_t seed,
                                    const std::vector<int>& Ks, const EmOptions& opts_in, int burn_in) {
  if (reps < 1) throw InvalidParameter("selection_experiment: reps must be >= 1");
  const int p = truth.spec.p_max();
  EmOptions opts = opts_in;
  opts.parallel = false;
  SelectionRates r = make_rates(reps, false);
  std::vector<std::string> errors(static_cast<std::size_t>(reps));
  std::vector<bool> failed(static_cast<std::size_t>(reps), false);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t i) {
    try {
      const auto sim = simulate(truth, T, burn_in, sub_seed(seed, i));
      const SelectionResult sel = select_grid(sim.series, Ks, {p}, Criterion::bic, opts);
      for (std::size_t c = 0; c < kAll.size(); ++c) {
        const int w = select_winner(sel.table, kAll[c]);
        r.picks[c][i] = sel.table[static_cast<std::size_t>(w)].K;
        r.p_picks[c][i] = sel.table[static_cast<std::size_t>(w)].p;
      }
      for (const auto& row : sel.table)
        if (!row.ok) errors[i] += "rep " + std::to_string(i + 1) + " K=" + std::to_string(row.K) + ": " + row.status + " ";
    } catch (const Error& e) {
      failed[i] = true;
      errors[i] = "rep " + std::to_string(i + 1) + ": " + e.what();
    }
  });
  for (bool f : failed) r.failed += f;
  finish_rates(r, truth.spec.K(), truth.spec.p_max(), errors);
  return r;
}

SelectionRates stepwise_experiment(const MmarModel& truth, Index T, int reps, std::uint64_t seed,
                                   const std::vector<int>& Ks, const std::vector<int>& ps, const EmOptions& opts_in,
                                   int burn_in) {
  if (reps < 1) throw InvalidParameter("stepwise_experiment: reps must be >= 1");
  EmOptions opts = opts_in;
  opts.parallel = false;
  SelectionRates r = make_rates(reps, true);
  std::vector<std::string> errors(static_cast<std::size_t>(reps));
  std::vector<bool> failed(static_cast<std::size_t>(reps), false);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t i) {
    try {
      const auto sim = simulate(truth, T, burn_in, sub_seed(seed, i));
      // Stage-1 fits are shared by all criteria; stage 2 is fitted once per selected K.
      const int p1 = std::find(ps.begin(), ps.end(), 1) != ps.end() ? 1 : *std::min_element(ps.begin(), ps.end());
      const SelectionResult s1 = select_grid(sim.series, Ks, {p1}, Criterion::bic, opts);
      std::vector<int> rest;
      for (int p : ps)
        if (p != p1) rest.push_back(p);
      std::map<int, std::vector<SelectionRow>> stage2;
      for (std::size_t c = 0; c < kAll.size(); ++c) {
        const int w1 = select_winner(s1.table, kAll[c]);
        if (w1 < 0) continue;
        const SelectionRow& row1 = s1.table[static_cast<std::size_t>(w1)];
        auto it = stage2.find(row1.K);
        if (it == stage2.end()) {
          std::vector<SelectionRow> rows{row1};
          if (!rest.empty()) {
            const SelectionResult s2 = select_grid(sim.series, {row1.K}, rest, Criterion::bic, opts);
            rows.insert(rows.end(), s2.table.begin(), s2.table.end());
          }
          it = stage2.emplace(row1.K, std::move(rows)).first;
        }
        const int w2 = select_winner(it->second, kAll[c]);
        r.picks[c][i] = row1.K;
        r.p_picks[c][i] = it->second[static_cast<std::size_t>(w2)].p;
      }
    } catch (const Error& e) {
      failed[i] = true;
      errors[i] = "rep " + std::to_string(i + 1) + ": " + e.what();
    }
  });
  for (bool f : failed) r.failed += f;
  finish_rates(r, truth.spec.K(), truth.spec.p_max(), errors);
  return r;
}

}  // namespace mmar
