#include "mdpsense/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

namespace mdpsense {

TransitionFunction mixture(const TransitionFunction& P, const TransitionFunction& Q,
                           double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw ValidationError("mixture: eps must lie in [0,1]");
  if (!P.shape_matches(Q)) throw ValidationError("mixture: shapes differ");

  std::vector<std::vector<std::size_t>> counts(P.horizon(),
                                               std::vector<std::size_t>(P.num_states()));
  for (std::size_t n = 0; n < P.horizon(); ++n)
    for (std::size_t i = 0; i < P.num_states(); ++i) counts[n][i] = P.num_actions(n, i);

  TransitionFunction out(P.num_states(), counts);
  std::vector<double> row(P.num_states());
  for (std::size_t n = 0; n < P.horizon(); ++n)
    for (std::size_t i = 0; i < P.num_states(); ++i)
      for (std::size_t k = 0; k < P.num_actions(n, i); ++k) {
        const auto& p = P.row(n, i, k);
        const auto& q = Q.row(n, i, k);
        for (std::size_t j = 0; j < row.size(); ++j)
          row[j] = (1.0 - eps) * p[j] + eps * q[j];
        out.set_row(n, i, k, row);
      }
  return out;
}

ValueTables frechet_fixed(const FiniteMdm& mdm, const Strategy& pi,
                          const TransitionFunction& Q) {
  require_admissible(mdm, pi);
  if (!Q.shape_matches(mdm.transitions))
    throw ValidationError("frechet_fixed: direction shape does not match the model");

  const std::size_t N = std::size_t(mdm.horizon);
  const std::size_t s = mdm.num_states();
  const ValueTables value = reward_iteration(mdm, pi);

  ValueTables out;
  out.v.assign(N + 1, std::vector<double>(s, 0.0));
  for (std::size_t n = N; n-- > 0;) {
    const auto& vdot_next = out.v[n + 1];
    const auto& v_next = value.v[n + 1];
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t k = std::size_t(pi.action[n][i]);
      const auto& p = mdm.transitions.row(n, i, k);
      const auto& q = Q.row(n, i, k);
      double acc = 0.0;
      for (std::size_t j = 0; j < s; ++j)
        acc += vdot_next[j] * p[j] + v_next[j] * (q[j] - p[j]);
      out.v[n][i] = acc;
    }
  }
  return out;
}

namespace {

// Expected total reward from (n, x) by explicit path enumeration; independent
// of the backward recursion.
double value_by_paths(const FiniteMdm& mdm, const Strategy& pi, std::size_t n,
                      std::size_t x) {
  const std::size_t N = std::size_t(mdm.horizon);
  if (n == N) return mdm.terminal_rewards[x];
  const std::size_t s = mdm.num_states();
  const std::size_t k = std::size_t(pi.action[n][x]);
  const auto& row = mdm.transitions.row(n, x, k);
  double acc = 0.0;
  for (std::size_t j = 0; j < s; ++j)
    acc += row[j] * value_by_paths(mdm, pi, n + 1, j);
  return mdm.stage_rewards[n][x][k] + acc;
}

}  // namespace

double frechet_fixed_direct(const FiniteMdm& mdm, const Strategy& pi,
                            const TransitionFunction& Q, std::size_t x0,
                            std::uint64_t cap) {
  require_admissible(mdm, pi);
  if (!Q.shape_matches(mdm.transitions))
    throw ValidationError("frechet_fixed_direct: direction shape mismatch");
  if (x0 >= mdm.num_states())
    throw ValidationError("frechet_fixed_direct: initial state out of range");

  const std::size_t N = std::size_t(mdm.horizon);
  const std::size_t s = mdm.num_states();
  if (double(N) * std::pow(double(s), double(N)) > double(cap))
    throw CapExceeded("direct derivative summation", double(N) * std::pow(double(s), double(N)),
                      double(cap));

  // One term per stage k: propagate the strategy's path distribution to time
  // k under P, swap in the (Q - P) factor, close with path-enumerated values.
  double total = 0.0;
  std::vector<double> dist(s, 0.0), next(s, 0.0);
  dist[x0] = 1.0;
  for (std::size_t k = 0; k < N; ++k) {
    for (std::size_t yk = 0; yk < s; ++yk) {
      if (dist[yk] == 0.0) continue;
      const std::size_t a = std::size_t(pi.action[k][yk]);
      const auto& p = mdm.transitions.row(k, yk, a);
      const auto& q = Q.row(k, yk, a);
      double inner = 0.0;
      for (std::size_t y = 0; y < s; ++y)
        if (q[y] != p[y]) inner += (q[y] - p[y]) * value_by_paths(mdm, pi, k + 1, y);
      total += dist[yk] * inner;
    }
    // advance the P-distribution one step
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t yk = 0; yk < s; ++yk) {
      if (dist[yk] == 0.0) continue;
      const std::size_t a = std::size_t(pi.action[k][yk]);
      const auto& p = mdm.transitions.row(k, yk, a);
      for (std::size_t y = 0; y < s; ++y) next[y] += dist[yk] * p[y];
    }
    dist.swap(next);
  }
  return total;
}

SensitivityResult hadamard_optimal(const FiniteMdm& mdm, const TransitionFunction& Q,
                                   const StrategySet& strategies, bool with_breakdown) {
  if (strategies.strategies.empty())
    throw ValidationError("hadamard_optimal: empty strategy set");

  const std::size_t s = mdm.num_states();
  const bool maximize = mdm.sense == Sense::Maximize;

  SensitivityResult out;
  out.strategy_set_kind = strategies.kind;
  out.per_initial_state.assign(s, {});

  for (std::size_t si = 0; si < strategies.strategies.size(); ++si) {
    ValueTables vdot = frechet_fixed(mdm, strategies.strategies[si], Q);
    if (with_breakdown) out.per_strategy_breakdown.push_back(vdot.v[0]);
    for (std::size_t i = 0; i < s; ++i) {
      const double d = vdot.v[0][i];
      auto& slot = out.per_initial_state[i];
      if (si == 0 || (maximize ? d > slot.derivative : d < slot.derivative)) {
        slot.derivative = d;
        slot.achieving_index = si;
      }
    }
  }
  return out;
}

double fd_quotient(const FiniteMdm& mdm, const TransitionFunction& Q, double eps,
                   std::size_t x0) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw ValidationError("fd_quotient: eps must lie in (0,1]");
  if (x0 >= mdm.num_states()) throw ValidationError("fd_quotient: x0 out of range");
  const TransitionFunction mixed = mixture(mdm.transitions, Q, eps);
  const BellmanResult base = bellman(mdm);
  const BellmanResult pert = bellman_with(mdm, mixed);
  return (pert.values.v[0][x0] - base.values.v[0][x0]) / eps;
}

double fd_quotient_fixed(const FiniteMdm& mdm, const Strategy& pi,
                         const TransitionFunction& Q, double eps, std::size_t x0) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw ValidationError("fd_quotient_fixed: eps must lie in (0,1]");
  if (x0 >= mdm.num_states())
    throw ValidationError("fd_quotient_fixed: x0 out of range");
  const TransitionFunction mixed = mixture(mdm.transitions, Q, eps);
  const ValueTables base = reward_iteration(mdm, pi);
  const ValueTables pert = reward_iteration_with(mdm, pi, mixed);
  return (pert.v[0][x0] - base.v[0][x0]) / eps;
}

std::vector<FdRow> fd_report(const FiniteMdm& mdm, const TransitionFunction& Q,
                             std::span<const double> eps_grid, std::size_t x0,
                             OptimalEnumMode set_mode, std::uint64_t cap) {
  const StrategySet set = enumerate_optimal_strategies(mdm, set_mode, cap);
  const SensitivityResult sens = hadamard_optimal(mdm, Q, set);
  const double derivative = sens.per_initial_state.at(x0).derivative;

  std::vector<FdRow> rows;
  rows.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    double quot = fd_quotient(mdm, Q, eps, x0);
    rows.push_back({eps, quot, std::abs(quot - derivative)});
  }
  return rows;
}

}  // namespace mdpsense
