#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdpsense/mdm.hpp"

namespace mdpsense {

/// Mixture (1-eps) P + eps Q, row-wise. eps must lie in [0,1]; shapes must
/// match. Directions are always specified by the target Q, so the result is a
/// valid transition function by convexity.
TransitionFunction mixture(const TransitionFunction& P, const TransitionFunction& Q,
                           double eps);

/// First-order sensitivity of the fixed-strategy value in direction Q - P,
/// by the backward scheme
///   Vdot[N] = 0,
///   Vdot[n][i] = sum_j Vdot[n+1][j] p_{n,i;f}(j)
///              + sum_j V[n+1][j] (q - p)_{n,i;f}(j),
/// where V is the fixed-strategy value table. Returns the full tables;
/// row 0 holds the derivative per initial state.
ValueTables frechet_fixed(const FiniteMdm& mdm, const Strategy& pi,
                          const TransitionFunction& Q);

/// Same quantity by explicit nested summation: one replaced kernel factor per
/// stage, with all inner values recomputed by path enumeration. Serves as an
/// independent cross-check of frechet_fixed; cost ~ N * s^N (cap-checked).
double frechet_fixed_direct(const FiniteMdm& mdm, const Strategy& pi,
                            const TransitionFunction& Q, std::size_t x0,
                            std::uint64_t cap = kDefaultPathCap);

struct SensitivityResult {
  struct PerState {
    double derivative = 0.0;
    std::size_t achieving_index = 0;  // index into the strategy set
  };
  std::vector<PerState> per_initial_state;
  StrategySetKind strategy_set_kind = StrategySetKind::Exact;
  /// Optional per-strategy derivatives (breakdown[s][i] for strategy s at
  /// initial state i), aligned with the input set; filled when requested.
  std::vector<std::vector<double>> per_strategy_breakdown;
};

/// Sensitivity of the optimal value: per initial state, the max (Maximize) or
/// min (Minimize) of the fixed-strategy derivative over the given optimal
/// strategy set. Ties resolve to the lexicographically smallest strategy
/// index. Throws on an empty set.
///
/// The caller chooses the set and owns its cost. A MaximizerProduct set can
/// be a proper subset of the optimal strategies, so the reported extremum may
/// under-approximate the one over the Exact set; the result records which
/// kind was supplied.
SensitivityResult hadamard_optimal(const FiniteMdm& mdm, const TransitionFunction& Q,
                                   const StrategySet& strategies,
                                   bool with_breakdown = false);

/// Forward-difference quotient of the optimal value along the segment toward
/// Q: (V0 of bellman under mixture(P,Q,eps) - V0 under P) / eps, at x0.
/// The perturbed problem is re-optimized.
double fd_quotient(const FiniteMdm& mdm, const TransitionFunction& Q, double eps,
                   std::size_t x0);

/// Fixed-strategy forward-difference quotient (reward_iteration on the
/// mixture; no re-optimization).
double fd_quotient_fixed(const FiniteMdm& mdm, const Strategy& pi,
                         const TransitionFunction& Q, double eps, std::size_t x0);

struct FdRow {
  double eps;
  double quotient;
  double abs_error;  // |quotient - derivative|
};

/// fd_quotient over a grid of eps values, with the error column taken against
/// hadamard_optimal over the chosen strategy set.
std::vector<FdRow> fd_report(const FiniteMdm& mdm, const TransitionFunction& Q,
                             std::span<const double> eps_grid, std::size_t x0,
                             OptimalEnumMode set_mode = OptimalEnumMode::MaximizerProduct,
                             std::uint64_t cap = kDefaultEnumCap);

}  // namespace mdpsense
