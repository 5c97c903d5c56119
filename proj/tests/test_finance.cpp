#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "mdpsense/finance.hpp"
#include "mdpsense/sensitivity.hpp"
#include "test_util.hpp"

using namespace mdpsense;

TEST_CASE("one-stage objective basics") {
  auto crr = crr_model(0.6, 1.5, 0.5, 1.0, 0.5, 1, 1.0);
  CHECK(one_stage_value(crr, 0, 0.0) == 1.0);  // exactly
  double got = one_stage_value(crr, 0, 1.0);
  double want = 0.6 * std::sqrt(1.5) + 0.4 * std::sqrt(0.5);
  CHECK(got == doctest::Approx(want).epsilon(1e-14));

  // degenerate return at the bond rate: flat objective, value 1
  FinanceModel flat;
  flat.periods = 1;
  flat.rates = {1.05};
  flat.returns = {Measure1D::dirac(1.05)};
  flat.alpha = 0.5;
  for (double g : {0.0, 0.3, 1.0}) CHECK(one_stage_value(flat, 0, g) == 1.0);
  auto sol = solve_gamma_numeric(flat, 0);
  CHECK(sol.gamma == 0.0);  // smallest maximizer by convention
  CHECK(sol.value == 1.0);
}

TEST_CASE("closed-form CRR fraction and thresholds") {
  // interior: prefactor 4, numerator 0.05, denominator 0.26
  double g = gamma_crr(0.6, 1.5, 0.5, 1.0, 0.5);
  CHECK(g == doctest::Approx(4.0 * 0.05 / 0.26).epsilon(1e-14));
  CHECK(std::abs(g - 0.7692) < 1e-4);
  // p0 = 0.5 here; p1 = u^{1/2}(r-d) / (u^{1/2}(r-d) + d^{1/2}(u-r))
  CHECK(gamma_crr(0.5, 1.5, 0.5, 1.0, 0.5) == 0.0);
  CHECK(gamma_crr(0.3, 1.5, 0.5, 1.0, 0.5) == 0.0);
  double p1 = std::sqrt(1.5) * 0.5 / (std::sqrt(1.5) * 0.5 + std::sqrt(0.5) * 0.5);
  CHECK(gamma_crr(p1, 1.5, 0.5, 1.0, 0.5) == 1.0);
  CHECK(gamma_crr(0.99, 1.5, 0.5, 1.0, 0.5) == 1.0);
}

TEST_CASE("closed-form Merton fraction and thresholds") {
  CHECK(gamma_bsm(0.05, 0.2, 0.5, 0.05) == 0.0);  // nu = mu
  CHECK(gamma_bsm(0.05, 0.2, 0.5, 0.07) == 0.0);
  CHECK(gamma_bsm(0.05, 0.2, 0.5, 0.04) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(gamma_bsm(0.05, 0.2, 0.5, 0.03) == 1.0);  // threshold nu = 0.03 exactly
  CHECK(gamma_bsm(0.05, 0.2, 0.5, 0.01) == 1.0);
}

TEST_CASE("numeric one-stage solve agrees with the closed forms") {
  auto crr = crr_model(0.6, 1.5, 0.5, 1.0, 0.5, 1, 1.0);
  auto sol = solve_gamma_numeric(crr, 0);
  CHECK(std::abs(sol.gamma - gamma_crr(0.6, 1.5, 0.5, 1.0, 0.5)) <= 1e-9);
  CHECK(std::abs(sol.gamma - 0.7692) < 1e-4);

  // boundary regimes give exact endpoints
  auto low = crr_model(0.4, 1.5, 0.5, 1.0, 0.5, 1, 1.0);
  CHECK(solve_gamma_numeric(low, 0).gamma == 0.0);
  auto high = crr_model(0.99, 1.5, 0.5, 1.0, 0.5, 1, 1.0);
  CHECK(solve_gamma_numeric(high, 0).gamma == 1.0);

  // discretized lognormal market at the monthly grid: Merton up to O(1/N)
  auto bsm = bsm_model(0.05, 0.2, 0.04, 0.5, 12, 1.0);
  CHECK(std::abs(solve_gamma_numeric(bsm, 0).gamma - 0.5) <= 1e-4);
}

TEST_CASE("value_product structure") {
  auto crr = crr_model(0.6, 1.5, 0.5, 1.0, 0.5, 3, 1.0);
  std::vector<double> zeros(3, 0.0);
  CHECK(stage_value_product(crr, zeros, 0) == 1.0);
  // empty tail product at n = N
  CHECK(value_product(crr, zeros, 3, 2.0) ==
        doctest::Approx(u_alpha(2.0 / crr.bond_factor(3), 0.5)).epsilon(1e-15));
}

TEST_CASE("frechet_product: zero direction and single-jump telescoping") {
  auto bsm = bsm_model(0.05, 0.2, 0.03, 0.5, 12, 1.0);
  auto gammas = optimal_gammas(bsm);
  CHECK(frechet_product(bsm, bsm.returns, gammas) == 0.0);

  // single jump: only the replaced period survives; independent of tau
  std::vector<double> values;
  for (int tau = 0; tau < 12; ++tau) {
    auto q = jump_direction(bsm, 0.5, {tau});
    values.push_back(frechet_product(bsm, q, gammas));
  }
  for (double v : values)
    CHECK(std::abs(v - values.front()) <= 1e-12 * std::abs(values.front()));

  // telescoped by hand: one factor swap, all P-factors identical
  double vp = one_stage_value(bsm, 0, gammas[0]);
  FinanceModel jumped = bsm;
  jumped.returns[0] = Measure1D::dirac(0.5);
  double vq = one_stage_value(jumped, 0, gammas[0]);
  double want = (vq - vp) * std::pow(vp, 11.0);
  CHECK(values.front() == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("hadamard_finance: complete bond investment kills the derivative") {
  for (double nu : {0.05, 0.06, 0.10}) {
    auto bsm = bsm_model(0.05, 0.2, nu, 0.5, 12, 1.0);
    auto q = jump_direction(bsm, 0.5, {3});
    CHECK(hadamard_finance(bsm, q) == 0.0);  // exactly
  }
}

TEST_CASE("market assumption flags") {
  auto clean = crr_model(0.6, 1.5, 0.5, 1.0, 0.5, 2, 1.0);
  CHECK(finance_model_flags(clean).ok());

  FinanceModel degenerate = clean;
  degenerate.returns[0] = Measure1D::discrete({{0.0, 0.5}, {1.0, 0.5}});
  auto rep = finance_model_flags(degenerate);
  REQUIRE(!rep.ok());
  CHECK(rep.to_string().find("vanish") != std::string::npos);
  CHECK(rep.to_string().find("bond rate") != std::string::npos);
}

TEST_CASE("jump_direction bookkeeping") {
  auto bsm = bsm_model(0.05, 0.2, 0.03, 0.5, 4, 1.0);
  auto none = jump_direction(bsm, 0.5, {});
  CHECK(none == bsm.returns);
  auto all = jump_direction(bsm, 0.5, {0, 1, 2, 3});
  for (const auto& m : all) CHECK(m == Measure1D::dirac(0.5));
  CHECK_THROWS_AS(jump_direction(bsm, 0.5, {4}), std::domain_error);
  CHECK_THROWS_AS(jump_direction(bsm, -1.0, {0}), std::domain_error);
}

TEST_CASE("multi-jump derivative magnitude is non-decreasing in the jump count") {
  auto bsm = bsm_model(0.05, 0.2, 0.03, 0.5, 12, 1.0);
  double prev = 0.0;
  for (int ell = 1; ell <= 12; ++ell) {
    std::vector<int> periods;
    for (int t = 0; t < ell; ++t) periods.push_back(t);
    double d = std::abs(hadamard_finance(bsm, jump_direction(bsm, 0.5, periods)));
    CHECK(d >= prev - 1e-15);
    prev = d;
  }
}

TEST_CASE("finance fd quotient approaches the derivative linearly") {
  auto bsm = bsm_model(0.05, 0.2, 0.035, 0.5, 6, 1.0);
  auto q = jump_direction(bsm, 0.5, {2});
  const double derivative = hadamard_finance(bsm, q);
  std::vector<double> grid = {1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<double> errs;
  for (double eps : grid)
    errs.push_back(std::abs(finance_fd_quotient(bsm, q, eps) - derivative));
  CHECK(testutil::fd_linear_decay(grid, errs, derivative));
}

TEST_CASE("figure sweeps: shapes, tau rows constant") {
  BsmParams base{0.05, 0.2, 0.03};
  FigureSweepSpec spec;
  spec.deltas = {0.5};
  spec.taus = {0, 3, 7, 11};
  auto rows = figure_sweeps(base, 0.5, 1.0, spec);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.horizon == 12);
    CHECK(std::abs(r.derivative - rows.front().derivative) <=
          1e-12 * std::abs(rows.front().derivative));
  }
  FigureSweepSpec both = spec;
  both.ells = {1, 2};
  CHECK_THROWS_AS(figure_sweeps(base, 0.5, 1.0, both), std::domain_error);
}

// ---------------------------------------------------------------------------
// Cross-check against the generic MDM machinery on an exact wealth lattice.
// States are multisets of per-period growth factors (so recombination is
// bit-exact); actions are fractions on a grid; padding states carry one
// self-loop action.
namespace {

struct Lattice {
  FiniteMdm mdm;
  std::vector<std::vector<std::size_t>> level_states;  // states live per epoch
  std::vector<double> factor_of_gamma_up, factor_of_gamma_down;
  std::vector<int> up_id, down_id;  // gamma index -> factor id
  std::size_t x0_state = 0;
};

Lattice build_lattice(double p, double u, double d, double r, double alpha, int N,
                      double x0, int grid_m) {
  std::vector<double> gammas;
  for (int k = 0; k <= grid_m; ++k) gammas.push_back(double(k) / grid_m);

  Lattice lat;
  lat.factor_of_gamma_up.resize(gammas.size());
  lat.factor_of_gamma_down.resize(gammas.size());
  std::vector<double> factors;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    lat.factor_of_gamma_up[k] = r + gammas[k] * (u - r);
    lat.factor_of_gamma_down[k] = r + gammas[k] * (d - r);
    factors.push_back(lat.factor_of_gamma_up[k]);
    factors.push_back(lat.factor_of_gamma_down[k]);
  }
  std::sort(factors.begin(), factors.end());
  factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
  const auto factor_id = [&](double f) {
    return int(std::lower_bound(factors.begin(), factors.end(), f) - factors.begin());
  };
  lat.up_id.resize(gammas.size());
  lat.down_id.resize(gammas.size());
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    lat.up_id[k] = factor_id(lat.factor_of_gamma_up[k]);
    lat.down_id[k] = factor_id(lat.factor_of_gamma_down[k]);
  }

  // states: factor multisets per level, merged into one indexed list
  std::map<std::vector<int>, std::size_t> index_of;
  std::vector<std::vector<int>> multisets;
  std::vector<std::vector<std::vector<int>>> levels(std::size_t(N) + 1);
  const auto intern = [&](const std::vector<int>& ms) {
    auto [it, fresh] = index_of.try_emplace(ms, multisets.size());
    if (fresh) multisets.push_back(ms);
    return it->second;
  };
  levels[0] = {{}};
  lat.level_states.assign(std::size_t(N) + 1, {});
  lat.x0_state = intern({});
  lat.level_states[0] = {lat.x0_state};
  for (int t = 0; t < N; ++t) {
    std::map<std::vector<int>, char> next;
    for (const auto& ms : levels[std::size_t(t)])
      for (std::size_t k = 0; k < gammas.size(); ++k)
        for (int id : {lat.up_id[k], lat.down_id[k]}) {
          std::vector<int> grown = ms;
          grown.insert(std::upper_bound(grown.begin(), grown.end(), id), id);
          next.emplace(std::move(grown), 0);
        }
    for (auto& [ms, unused] : next) {
      levels[std::size_t(t) + 1].push_back(ms);
      lat.level_states[std::size_t(t) + 1].push_back(intern(ms));
    }
  }

  const std::size_t S = multisets.size();
  const auto wealth = [&](std::size_t i) {
    double w = x0;
    for (int id : multisets[i]) w *= factors[std::size_t(id)];
    return w;
  };
  std::vector<char> live_at(std::size_t(N) * S, 0);
  for (int t = 0; t < N; ++t)
    for (std::size_t i : lat.level_states[std::size_t(t)])
      live_at[std::size_t(t) * S + i] = 1;

  FiniteMdm& mdm = lat.mdm;
  mdm.horizon = N;
  mdm.sense = Sense::Maximize;
  for (std::size_t i = 0; i < S; ++i) mdm.states.push_back("w" + std::to_string(i));
  mdm.terminal_rewards.resize(S);
  const double bond_n = std::pow(r, double(N));
  for (std::size_t i = 0; i < S; ++i)
    mdm.terminal_rewards[i] = u_alpha(wealth(i) / bond_n, alpha);

  std::vector<std::vector<std::size_t>> counts(std::size_t(N),
                                               std::vector<std::size_t>(S, 1));
  mdm.actions.assign(std::size_t(N), {});
  mdm.stage_rewards.assign(std::size_t(N), {});
  for (int t = 0; t < N; ++t) {
    mdm.actions[std::size_t(t)].assign(S, {"hold"});
    mdm.stage_rewards[std::size_t(t)].assign(S, {0.0});
    for (std::size_t i = 0; i < S; ++i)
      if (live_at[std::size_t(t) * S + i]) {
        counts[std::size_t(t)][i] = gammas.size();
        mdm.actions[std::size_t(t)][i].clear();
        mdm.stage_rewards[std::size_t(t)][i].assign(gammas.size(), 0.0);
        for (std::size_t k = 0; k < gammas.size(); ++k)
          mdm.actions[std::size_t(t)][i].push_back("g" + std::to_string(k));
      }
  }
  mdm.transitions = TransitionFunction(S, counts);
  std::vector<double> row(S);
  for (int t = 0; t < N; ++t)
    for (std::size_t i = 0; i < S; ++i) {
      if (!live_at[std::size_t(t) * S + i]) {
        std::fill(row.begin(), row.end(), 0.0);
        row[i] = 1.0;  // padding self-loop
        mdm.transitions.set_row(std::size_t(t), i, 0, row);
        continue;
      }
      for (std::size_t k = 0; k < gammas.size(); ++k) {
        std::fill(row.begin(), row.end(), 0.0);
        std::vector<int> up = multisets[i], down = multisets[i];
        up.insert(std::upper_bound(up.begin(), up.end(), lat.up_id[k]), lat.up_id[k]);
        down.insert(std::upper_bound(down.begin(), down.end(), lat.down_id[k]),
                    lat.down_id[k]);
        row[index_of.at(up)] += p;
        row[index_of.at(down)] += 1.0 - p;
        mdm.transitions.set_row(std::size_t(t), i, k, row);
      }
    }
  return lat;
}

}  // namespace

TEST_CASE("wealth-lattice cross-check against the product formulas") {
  struct Config {
    int N;
    int grid_m;
  };
  const double p = 0.6, u = 1.5, d = 0.5, r = 1.05, alpha = 0.5, x0 = 1.0;
  for (Config cfg : {Config{1, 64}, Config{2, 32}, Config{3, 8}}) {
    CAPTURE(cfg.N);
    auto lat = build_lattice(p, u, d, r, alpha, cfg.N, x0, cfg.grid_m);
    REQUIRE(validate(lat.mdm).ok());

    FinanceModel model = crr_model(p, u, d, r, alpha, cfg.N, x0);

    // best fraction on the grid, via the one-stage machinery
    std::size_t best_k = 0;
    double best_v = -1.0;
    for (int k = 0; k <= cfg.grid_m; ++k) {
      double v = one_stage_value(model, 0, double(k) / cfg.grid_m);
      if (v > best_v) {
        best_v = v;
        best_k = std::size_t(k);
      }
    }

    auto res = bellman(lat.mdm);
    const double got = res.values.v[0][lat.x0_state];
    const double via_grid = std::pow(best_v, double(cfg.N)) * u_alpha(x0, alpha);
    CHECK(std::abs(got - via_grid) <= 1e-10 * (1.0 + std::abs(via_grid)));

    // within the grid's own approximation bound of the closed-form optimum
    const double gstar = gamma_crr(p, u, d, r, alpha);
    std::vector<double> gvec(std::size_t(cfg.N), gstar);
    const double exact = value_product(model, gvec, 0, x0);
    const double bound = std::abs(exact - via_grid) + 1e-9 * (1.0 + std::abs(exact));
    CHECK(std::abs(got - exact) <= bound);

    // derivative: same grid fraction on both pipelines, jump to the down factor
    Strategy pi;
    pi.action.assign(std::size_t(cfg.N), std::vector<int>(lat.mdm.num_states(), 0));
    for (int t = 0; t < cfg.N; ++t)
      for (std::size_t i : lat.level_states[std::size_t(t)])
        pi.action[std::size_t(t)][i] = int(best_k);

    // Direction: at the final epoch the return jumps to the down factor, so
    // every jump target is already a lattice state. The down successor has
    // the smaller terminal reward of the (at most two) entries in the row.
    const int tau = cfg.N - 1;
    TransitionFunction q = lat.mdm.transitions;
    {
      std::vector<double> row(lat.mdm.num_states(), 0.0);
      for (std::size_t level_i : lat.level_states[std::size_t(tau)]) {
        for (std::size_t k = 0; k < lat.up_id.size(); ++k) {
          std::fill(row.begin(), row.end(), 0.0);
          const auto& base = lat.mdm.transitions.row(std::size_t(tau), level_i, k);
          std::size_t down_idx = 0;
          double min_term = std::numeric_limits<double>::infinity();
          for (std::size_t j = 0; j < base.size(); ++j)
            if (base[j] > 0.0 && lat.mdm.terminal_rewards[j] < min_term) {
              min_term = lat.mdm.terminal_rewards[j];
              down_idx = j;
            }
          row[down_idx] = 1.0;
          q.set_row(std::size_t(tau), level_i, k, row);
        }
      }
    }

    auto vdot = frechet_fixed(lat.mdm, pi, q);
    const double lattice_dot = vdot.v[0][lat.x0_state];

    std::vector<double> ggrid(std::size_t(cfg.N), double(best_k) / cfg.grid_m);
    auto qm = jump_direction(model, d, {tau});
    const double product_dot =
        frechet_product(model, qm, ggrid) * u_alpha(x0, alpha);
    CHECK(std::abs(lattice_dot - product_dot) <=
          1e-9 * (1.0 + std::abs(product_dot)));

    // and within the grid bound of the closed-form-fraction derivative
    const double product_dot_star =
        frechet_product(model, qm, gvec) * u_alpha(x0, alpha);
    const double dbound = std::abs(product_dot - product_dot_star) +
                          1e-9 * (1.0 + std::abs(product_dot_star));
    CHECK(std::abs(lattice_dot - product_dot_star) <= dbound);
  }
}
