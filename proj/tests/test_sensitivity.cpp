#include <cmath>
#include <random>

#include "doctest.h"
#include "mdpsense/inventory.hpp"
#include "mdpsense/sensitivity.hpp"
#include "test_util.hpp"

using namespace mdpsense;
using testutil::random_direction;
using testutil::random_mdm;
using testutil::random_strategy;

TEST_CASE("mixture arithmetic") {
  std::mt19937 rng(1);
  FiniteMdm mdm = random_mdm(rng);
  auto q = random_direction(rng, mdm);

  auto at0 = mixture(mdm.transitions, q, 0.0);
  auto at1 = mixture(mdm.transitions, q, 1.0);
  for (std::size_t n = 0; n < std::size_t(mdm.horizon); ++n)
    for (std::size_t i = 0; i < mdm.num_states(); ++i)
      for (std::size_t k = 0; k < mdm.num_actions(n, i); ++k) {
        CHECK(at0.row(n, i, k) == mdm.transitions.row(n, i, k));
        CHECK(at1.row(n, i, k) == q.row(n, i, k));
      }
  CHECK_THROWS_AS(mixture(mdm.transitions, q, 1.5), ValidationError);

  TransitionFunction p(2, {{1, 1}});
  TransitionFunction qq(2, {{1, 1}});
  p.set_row(0, 0, 0, {0.5, 0.5});
  p.set_row(0, 1, 0, {0.5, 0.5});
  qq.set_row(0, 0, 0, {1.0, 0.0});
  qq.set_row(0, 1, 0, {1.0, 0.0});
  auto mid = mixture(p, qq, 0.2);
  CHECK(mid.row(0, 0, 0)[0] == doctest::Approx(0.6));
  CHECK(mid.row(0, 0, 0)[1] == doctest::Approx(0.4));
}

TEST_CASE("frechet_fixed: zero direction gives zero tables") {
  std::mt19937 rng(2);
  FiniteMdm mdm = random_mdm(rng);
  Strategy pi = random_strategy(rng, mdm);
  auto vdot = frechet_fixed(mdm, pi, mdm.transitions);
  for (const auto& row : vdot.v)
    for (double x : row) CHECK(x == 0.0);
  CHECK(frechet_fixed_direct(mdm, pi, mdm.transitions, 0) == 0.0);
}

TEST_CASE("frechet_fixed is linear along the mixture segment") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    FiniteMdm mdm = random_mdm(rng);
    Strategy pi = random_strategy(rng, mdm);
    auto q = random_direction(rng, mdm);
    auto full = frechet_fixed(mdm, pi, q);
    for (double eps : {0.5, 0.125, 1e-3}) {
      auto part = frechet_fixed(mdm, pi, mixture(mdm.transitions, q, eps));
      for (std::size_t i = 0; i < mdm.num_states(); ++i)
        CHECK(part.v[0][i] ==
              doctest::Approx(eps * full.v[0][i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("representation II agrees with the direct nested-sum form") {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    FiniteMdm mdm = random_mdm(rng);
    Strategy pi = random_strategy(rng, mdm);
    auto q = random_direction(rng, mdm);
    auto scheme = frechet_fixed(mdm, pi, q);
    for (std::size_t i = 0; i < mdm.num_states(); ++i) {
      double direct = frechet_fixed_direct(mdm, pi, q, i);
      CHECK(std::abs(scheme.v[0][i] - direct) <= 1e-10 * (1.0 + std::abs(direct)));
    }
  }
}

TEST_CASE("N=1 direct derivative is the single replaced-kernel sum") {
  std::mt19937 rng(5);
  testutil::RandomModelOptions opt;
  opt.max_horizon = 1;
  FiniteMdm mdm = random_mdm(rng, opt);
  Strategy pi = random_strategy(rng, mdm);
  auto q = random_direction(rng, mdm);
  for (std::size_t i = 0; i < mdm.num_states(); ++i) {
    const auto k = std::size_t(pi.action[0][i]);
    double want = 0.0;
    for (std::size_t j = 0; j < mdm.num_states(); ++j)
      want += (q.row(0, i, k)[j] - mdm.transitions.row(0, i, k)[j]) *
              mdm.terminal_rewards[j];
    CHECK(frechet_fixed_direct(mdm, pi, q, i) ==
          doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("hadamard_optimal: zero direction, tie-break, and empty-set error") {
  std::mt19937 rng(6);
  FiniteMdm mdm = random_mdm(rng);
  auto set = enumerate_optimal_strategies(mdm, OptimalEnumMode::MaximizerProduct);
  auto sens = hadamard_optimal(mdm, mdm.transitions, set);
  CHECK(sens.strategy_set_kind == StrategySetKind::MaximizerProduct);
  for (const auto& per : sens.per_initial_state) {
    CHECK(per.derivative == 0.0);
    CHECK(per.achieving_index == 0);  // ties resolve to the first strategy
  }
  CHECK_THROWS_AS(hadamard_optimal(mdm, mdm.transitions, StrategySet{}), ValidationError);
}

TEST_CASE("hadamard_optimal with duplicated optimal actions matches brute force") {
  std::mt19937 rng(7);
  testutil::RandomModelOptions opt;
  opt.max_states = 3;
  opt.max_horizon = 2;
  opt.max_actions = 2;
  for (int trial = 0; trial < 15; ++trial) {
    FiniteMdm mdm = random_mdm(rng, opt);
    // duplicate the first action everywhere so optima are intentionally tied
    for (std::size_t n = 0; n < std::size_t(mdm.horizon); ++n)
      for (std::size_t i = 0; i < mdm.num_states(); ++i) {
        mdm.actions[n][i].push_back(mdm.actions[n][i][0] + "_dup");
        mdm.stage_rewards[n][i].push_back(mdm.stage_rewards[n][i][0]);
      }
    FiniteMdm grown = mdm;
    std::vector<std::vector<std::size_t>> counts(std::size_t(mdm.horizon),
                                                 std::vector<std::size_t>(mdm.num_states()));
    for (std::size_t n = 0; n < counts.size(); ++n)
      for (std::size_t i = 0; i < counts[n].size(); ++i)
        counts[n][i] = mdm.actions[n][i].size();
    grown.transitions = TransitionFunction(mdm.num_states(), counts);
    for (std::size_t n = 0; n < counts.size(); ++n)
      for (std::size_t i = 0; i < counts[n].size(); ++i) {
        for (std::size_t k = 0; k + 1 < counts[n][i]; ++k)
          grown.transitions.set_row(n, i, k, mdm.transitions.row(n, i, k));
        grown.transitions.set_row(n, i, counts[n][i] - 1, mdm.transitions.row(n, i, 0));
      }

    auto q = random_direction(rng, grown);
    auto exact = enumerate_optimal_strategies(grown, OptimalEnumMode::Exact);
    CHECK(exact.strategies.size() >= 2);  // duplicates force ties
    auto sens = hadamard_optimal(grown, q, exact, /*with_breakdown=*/true);
    CHECK(sens.per_strategy_breakdown.size() == exact.strategies.size());

    // oracle: filter all strategies by optimality, maximize the direct form
    auto vstar = bellman(grown).values.v[0];
    for (std::size_t i = 0; i < grown.num_states(); ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& pi : testutil::all_strategies(grown)) {
        auto v = reward_iteration(grown, pi).v[0];
        bool optimal = true;
        for (std::size_t j = 0; j < v.size(); ++j)
          optimal = optimal && vstar[j] - v[j] <= 1e-9 * (1.0 + std::abs(vstar[j]));
        if (optimal) best = std::max(best, frechet_fixed_direct(grown, pi, q, i));
      }
      CHECK(std::abs(sens.per_initial_state[i].derivative - best) <=
            1e-9 * (1.0 + std::abs(best)));
    }
  }
}

TEST_CASE("fd_quotient: zero direction is exactly zero") {
  std::mt19937 rng(8);
  FiniteMdm mdm = random_mdm(rng);
  for (double eps : {1.0, 0.1, 1e-3})
    CHECK(fd_quotient(mdm, mdm.transitions, eps, 0) == 0.0);
}

TEST_CASE("fd quotients converge linearly to the derivatives") {
  std::mt19937 rng(9);
  const std::vector<double> grid = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  for (int trial = 0; trial < 10; ++trial) {
    FiniteMdm mdm = random_mdm(rng);
    auto q = random_direction(rng, mdm);
    auto exact = enumerate_optimal_strategies(mdm, OptimalEnumMode::Exact);
    auto sens = hadamard_optimal(mdm, q, exact);
    const Strategy& pi = exact.strategies.front();
    auto fixed_dot = frechet_fixed(mdm, pi, q);

    for (std::size_t i = 0; i < mdm.num_states(); ++i) {
      std::vector<double> err_opt, err_fixed;
      for (double eps : grid) {
        err_opt.push_back(
            std::abs(fd_quotient(mdm, q, eps, i) - sens.per_initial_state[i].derivative));
        err_fixed.push_back(
            std::abs(fd_quotient_fixed(mdm, pi, q, eps, i) - fixed_dot.v[0][i]));
      }
      CHECK(testutil::fd_linear_decay(grid, err_opt, sens.per_initial_state[i].derivative));
      CHECK(testutil::fd_linear_decay(grid, err_fixed, fixed_dot.v[0][i]));
    }
  }
}

TEST_CASE("re-optimized quotient dominates the fixed-strategy quotient") {
  std::mt19937 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    FiniteMdm mdm = random_mdm(rng);
    auto q = random_direction(rng, mdm);
    auto set = enumerate_optimal_strategies(mdm, OptimalEnumMode::MaximizerProduct);
    const Strategy& pi = set.strategies.front();
    for (double eps : {0.5, 0.1, 1e-2, 1e-4})
      for (std::size_t i = 0; i < mdm.num_states(); ++i)
        CHECK(fd_quotient(mdm, q, eps, i) >=
              fd_quotient_fixed(mdm, pi, q, eps, i) - 1e-12);
  }
}

TEST_CASE("fd_linear_decay rejects non-decaying errors") {
  const std::vector<double> grid = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  const std::vector<double> flat(grid.size(), 0.5);
  CHECK(!testutil::fd_linear_decay(grid, flat, 1.0));
  std::vector<double> linear;
  for (double eps : grid) linear.push_back(3.0 * eps);
  CHECK(testutil::fd_linear_decay(grid, linear, 1.0));
}

TEST_CASE("fd_report on the inventory model: error column decays") {
  InventorySpec spec = builtin_inventory_spec();
  FiniteMdm mdm = build_inventory_mdm(spec);
  TransitionFunction q = demand_direction(spec, 0);
  const std::vector<double> grid = {1e-2, 1e-3, 1e-4, 1e-5};
  auto rows = fd_report(mdm, q, grid, inventory_state_index(spec, 0, 0));
  REQUIRE(rows.size() == 4);
  CHECK(rows.front().quotient == doctest::Approx(-34.195).epsilon(1e-3));
  for (std::size_t k = 0; k + 1 < rows.size(); ++k)
    CHECK(rows[k + 1].abs_error < rows[k].abs_error);
}

TEST_CASE("fd_report: zero direction produces zero columns") {
  std::mt19937 rng(11);
  FiniteMdm mdm = random_mdm(rng);
  const std::vector<double> grid = {1e-1, 1e-2};
  auto rows = fd_report(mdm, mdm.transitions, grid, 0);
  for (const auto& row : rows) {
    CHECK(row.quotient == 0.0);
    CHECK(row.abs_error == 0.0);
  }
}
