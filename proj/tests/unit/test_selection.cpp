#include <doctest.h>

#include <cmath>

#include "mmar/error.hpp"
#include "mmar/scenarios.hpp"
#include "mmar/selection.hpp"
#include "mmar/simulate.hpp"
#include "mmar/theta.hpp"
#include "support.hpp"

using namespace mmar;
using namespace mmar::test;

namespace {

SelectionRow row(int K, int p, Index dim, double ll, Index T) {
  SelectionRow r;
  r.K = K;
  r.p = p;
  r.dim = dim;
  r.ok = true;
  r.loglik = ll;
  r.crit = criteria(ll, dim, T, p);
  return r;
}

}  // namespace

TEST_CASE("criteria arithmetic") {
  // zero likelihood, dim 1, T - p_max = 15
  CHECK(criteria(0.0, 1, 16, 1).bic == doctest::Approx(std::log(15.0)));
  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const double ll = -1000.0 * uniform01(rng);
    const Index dim = 1 + static_cast<Index>(100 * uniform01(rng));
    const Index T = 10 + static_cast<Index>(500 * uniform01(rng));
    const Criteria c = criteria(ll, dim, T, 2);
    const double n = static_cast<double>(T - 2);
    CHECK(c.aic - c.bic == doctest::Approx((2.0 - std::log(n)) * static_cast<double>(dim)));
    CHECK(c.hq + 2 * ll == doctest::Approx(2.0 * std::log(std::log(n)) * static_cast<double>(dim)));
    // differences depend only on (dim, T, p_max)
    const Criteria d = criteria(ll - 7.0, dim, T, 2);
    CHECK(d.gic - c.gic == doctest::Approx(14.0));
  }
  CHECK_THROWS_AS(criteria(0.0, 1, 3, 1), InvalidParameter);
}

TEST_CASE("economic-indicator table row for K = 3, p = 1") {
  const Index dim = param_dim(MmarSpec::uniform(4, 5, 3, 1));
  REQUIRE(dim == 254);
  const Criteria c = criteria(-1504.04, dim, 132, 1);  // T - p_max = 131
  CHECK(std::abs(c.aic - 3516.09) < 0.5);
  CHECK(std::abs(c.bic - 4246.39) < 0.5);
  CHECK(std::abs(c.gic - 5236.18) < 0.5);
  CHECK(std::abs(c.hq - 3812.84) < 0.5);
  // the other convention misses BIC
  CHECK(std::abs(criteria(-1504.04, dim, 133, 1).bic - 4246.39) > 0.5);
}

TEST_CASE("criterion names") {
  CHECK(parse_criterion("BIC") == Criterion::bic);
  CHECK(criterion_name(Criterion::gic) == "GIC");
  CHECK_THROWS_AS(parse_criterion("mdl"), InvalidParameter);
}

TEST_CASE("winner: ties go to the smaller model, failures are skipped, shifts do not matter") {
  std::vector<SelectionRow> rows{row(2, 1, 53, -100.0, 200), row(1, 1, 26, -100.0, 200), row(3, 1, 80, -10.0, 200)};
  rows[1].crit.bic = rows[0].crit.bic = 500.0;
  rows[2].crit.bic = 600.0;
  CHECK(select_winner(rows, Criterion::bic) == 1);
  rows[1].ok = false;
  CHECK(select_winner(rows, Criterion::bic) == 0);

  std::vector<SelectionRow> a{row(1, 1, 26, -500.0, 300), row(2, 1, 53, -420.0, 300), row(3, 1, 80, -400.0, 300)};
  auto b = a;
  for (auto& r : b) r = row(r.K, r.p, r.dim, r.loglik + 1234.5, 300);
  for (auto c : {Criterion::aic, Criterion::bic, Criterion::hq, Criterion::gic})
    CHECK(select_winner(a, c) == select_winner(b, c));
  for (auto& r : a) r.ok = false;
  CHECK(select_winner(a, Criterion::bic) == -1);
}

TEST_CASE("grid and stepwise on two-regime data") {
  const MmarModel truth = load_scenario("scenario1");
  const auto data = simulate(truth, 800, 500, 77).series;
  const SelectionResult grid = select_grid(data, {1, 2}, {1}, Criterion::bic, EmOptions{});
  REQUIRE(grid.winner >= 0);
  CHECK(grid.table[static_cast<std::size_t>(grid.winner)].K == 2);
  CHECK(grid.n_fits == 2);
  REQUIRE(grid.winner_fit);
  const SelectionResult step = select_stepwise(data, {1, 2}, {1, 2}, Criterion::bic, EmOptions{});
  CHECK(step.table[static_cast<std::size_t>(step.winner)].K == 2);
  CHECK(step.table[static_cast<std::size_t>(step.winner)].p == 1);
  CHECK(step.n_fits == 3);  // |K| + |p| - 1
  const SelectionResult single = select_stepwise(data.slice(0, 200), {2}, {2}, Criterion::bic, EmOptions{});
  CHECK(single.table[static_cast<std::size_t>(single.winner)].p == 2);
  CHECK(single.n_fits == 1);
}
