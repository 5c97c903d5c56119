#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdpsense/errors.hpp"
#include "mdpsense/metrics.hpp"

namespace mdpsense {

enum class Sense { Maximize, Minimize };

inline constexpr std::uint64_t kDefaultEnumCap = 1'000'000;
inline constexpr std::uint64_t kDefaultPathCap = 10'000'000;
inline constexpr double kDefaultTieScale = 1e-9;  // tie tolerance = scale*(1+|opt|)

/// One-step transition rows, indexed by (epoch n, state i, admissible action
/// k). Each row is a stochastic vector over the state set. Rows whose sum is
/// within 1e-9 of 1 are renormalized on ingest; larger deviations are kept
/// verbatim for validate() to report.
class TransitionFunction {
 public:
  TransitionFunction() = default;

  /// Allocates rows for the given action-set sizes: counts[n][i] = |A_n(x_i)|.
  TransitionFunction(std::size_t num_states,
                     const std::vector<std::vector<std::size_t>>& counts);

  std::size_t horizon() const { return rows_.size(); }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions(std::size_t n, std::size_t i) const {
    return rows_[n][i].size();
  }

  const std::vector<double>& row(std::size_t n, std::size_t i, std::size_t k) const {
    return rows_[n][i][k];
  }

  /// Stores a row, renormalizing when its sum is within 1e-9 of 1.
  void set_row(std::size_t n, std::size_t i, std::size_t k, std::vector<double> row);

  bool shape_matches(const TransitionFunction& other) const;

 private:
  std::size_t num_states_ = 0;
  std::vector<std::vector<std::vector<std::vector<double>>>> rows_;
};

/// Finite Markov decision model: labelled states, per-epoch per-state action
/// sets, transition rows, stage and terminal rewards, and objective sense.
/// Immutable by convention after construction.
struct FiniteMdm {
  int horizon = 0;                                       // N >= 1
  std::vector<std::string> states;                       // labels, size s
  std::vector<std::vector<std::vector<std::string>>> actions;  // [n][i] -> labels
  TransitionFunction transitions;                        // rows per (n,i,k)
  std::vector<std::vector<std::vector<double>>> stage_rewards;  // [n][i][k]
  std::vector<double> terminal_rewards;                  // [i]
  Sense sense = Sense::Maximize;

  std::size_t num_states() const { return states.size(); }
  std::size_t num_actions(std::size_t n, std::size_t i) const {
    return actions[n][i].size();
  }

  /// Total number of admissible strategies as a double (may overflow 2^64).
  double strategy_count() const;

  /// Index of the state with the given label; throws if absent.
  std::size_t state_index(const std::string& label) const;
};

/// Deterministic Markov strategy: action[n][i] is an index into actions[n][i].
struct Strategy {
  std::vector<std::vector<int>> action;

  bool operator==(const Strategy&) const = default;
};

/// Value tables V[n][i] for n = 0..N, i over states.
struct ValueTables {
  std::vector<std::vector<double>> v;

  const std::vector<double>& at(std::size_t n) const { return v[n]; }
};

enum class StrategySetKind { Exact, MaximizerProduct, DeltaOptimal };

struct StrategySet {
  std::vector<Strategy> strategies;  // lexicographic in (n, state, action index)
  StrategySetKind kind = StrategySetKind::Exact;
  double delta = 0.0;
};

struct BellmanResult {
  ValueTables values;
  /// maximizers[n][i]: all action indices within the tie tolerance of the
  /// per-state optimum, ascending.
  std::vector<std::vector<std::vector<int>>> maximizers;
};

/// Reports every violated invariant (shapes, row sums, negative entries,
/// non-finite rewards, duplicate labels). Empty iff the model is well-formed.
ValidationReport validate(const FiniteMdm& mdm);

/// Checks admissibility of a strategy against the model; throws ValidationError.
void require_admissible(const FiniteMdm& mdm, const Strategy& pi);

/// Fixed-strategy expected total reward by backward iteration:
/// V[N] = r_N, V[n][i] = r_n(i, f_n(i)) + sum_j V[n+1][j] p_{n,i;f_n(i)}(j).
ValueTables reward_iteration(const FiniteMdm& mdm, const Strategy& pi);

/// As reward_iteration but against a replacement transition function of the
/// same shape (the model's own rewards are kept).
ValueTables reward_iteration_with(const FiniteMdm& mdm, const Strategy& pi,
                                  const TransitionFunction& trans);

/// Optimal value tables and per-state maximizer sets via the Bellman
/// recursion; opt is max or min according to mdm.sense.
BellmanResult bellman(const FiniteMdm& mdm, double tie_scale = kDefaultTieScale);
BellmanResult bellman_with(const FiniteMdm& mdm, const TransitionFunction& trans,
                           double tie_scale = kDefaultTieScale);

enum class OptimalEnumMode { Exact, MaximizerProduct };

/// Optimal strategies. Exact: every admissible strategy whose time-0 values
/// match the Bellman optimum at every initial state within the tie tolerance
/// (full enumeration, cap-checked). MaximizerProduct: the Cartesian product of
/// the Bellman maximizer sets (always a subset of the Exact set).
StrategySet enumerate_optimal_strategies(const FiniteMdm& mdm, OptimalEnumMode mode,
                                         std::uint64_t cap = kDefaultEnumCap,
                                         double tie_scale = kDefaultTieScale);

/// All strategies within delta of the optimum at every initial state
/// (V0 - delta <= V0^pi for Maximize; V0 + delta >= V0^pi for Minimize).
/// delta may be +infinity (sentinel: every admissible strategy).
StrategySet enumerate_delta_optimal(const FiniteMdm& mdm, double delta,
                                    std::uint64_t cap = kDefaultEnumCap);

/// Independent oracle: expected total reward by explicit enumeration of all
/// state paths from x0. Requires s^N <= cap.
double path_oracle(const FiniteMdm& mdm, const Strategy& pi, std::size_t x0,
                   std::uint64_t cap = kDefaultPathCap);

/// Distance between two shape-compatible transition functions:
/// max over (n,i,a) of d(p-row, q-row) / phi(x_i). `state_points` gives the
/// real value of each state for geometry-based metrics (may be empty for Tv);
/// `phi` may be empty (gauge identically 1), otherwise entries must be >= 1.
double d_inf(const TransitionFunction& P, const TransitionFunction& Q,
             RowMetric metric, std::span<const double> state_points = {},
             std::span<const double> phi = {}, double alpha = 1.0);

}  // namespace mdpsense
