#include "mdpsense/mdm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace mdpsense {

namespace {
constexpr double kRowRenormTol = 1e-9;

std::string triple(const FiniteMdm& mdm, std::size_t n, std::size_t i, std::size_t k) {
  return "(n=" + std::to_string(n) + ", state=" + mdm.states[i] +
         ", action=" + mdm.actions[n][i][k] + ")";
}
}  // namespace

TransitionFunction::TransitionFunction(
    std::size_t num_states, const std::vector<std::vector<std::size_t>>& counts)
    : num_states_(num_states) {
  rows_.resize(counts.size());
  for (std::size_t n = 0; n < counts.size(); ++n) {
    if (counts[n].size() != num_states)
      throw ValidationError("transition function needs one action count per state");
    rows_[n].resize(num_states);
    for (std::size_t i = 0; i < num_states; ++i)
      rows_[n][i].assign(counts[n][i], std::vector<double>(num_states, 0.0));
  }
}

void TransitionFunction::set_row(std::size_t n, std::size_t i, std::size_t k,
                                 std::vector<double> row) {
  if (row.size() != num_states_)
    throw ValidationError("transition row length " + std::to_string(row.size()) +
                          " does not match state count " + std::to_string(num_states_));
  double sum = 0.0;
  bool nonneg = true;
  for (double p : row) {
    sum += p;
    nonneg = nonneg && p >= 0.0 && std::isfinite(p);
  }
  // Renormalize genuine drift (e.g. decimal JSON) but keep rows that already
  // sum to 1 up to fp noise verbatim, so re-ingestion is the identity.
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * double(row.size());
  if (nonneg && sum > 0.0 && std::abs(sum - 1.0) > noise &&
      std::abs(sum - 1.0) <= kRowRenormTol)
    for (double& p : row) p /= sum;
  rows_[n][i][k] = std::move(row);
}

bool TransitionFunction::shape_matches(const TransitionFunction& other) const {
  if (num_states_ != other.num_states_ || rows_.size() != other.rows_.size())
    return false;
  for (std::size_t n = 0; n < rows_.size(); ++n) {
    if (rows_[n].size() != other.rows_[n].size()) return false;
    for (std::size_t i = 0; i < rows_[n].size(); ++i)
      if (rows_[n][i].size() != other.rows_[n][i].size()) return false;
  }
  return true;
}

double FiniteMdm::strategy_count() const {
  double total = 1.0;
  for (std::size_t n = 0; n < actions.size(); ++n)
    for (std::size_t i = 0; i < actions[n].size(); ++i)
      total *= double(actions[n][i].size());
  return total;
}

std::size_t FiniteMdm::state_index(const std::string& label) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == label) return i;
  throw ValidationError("unknown state label '" + label + "'");
}

ValidationReport validate(const FiniteMdm& mdm) {
  ValidationReport rep;
  const std::size_t s = mdm.states.size();
  const std::size_t N = std::size_t(std::max(mdm.horizon, 0));

  if (mdm.horizon < 1) rep.add("horizon must be >= 1, got " + std::to_string(mdm.horizon));
  if (s == 0) rep.add("state set is empty");
  {
    std::set<std::string> seen;
    for (const auto& lab : mdm.states)
      if (!seen.insert(lab).second) rep.add("duplicate state label '" + lab + "'");
  }

  if (mdm.actions.size() != N)
    rep.add("actions cover " + std::to_string(mdm.actions.size()) + " epochs, expected " +
            std::to_string(N));
  if (mdm.stage_rewards.size() != N)
    rep.add("stage_rewards cover " + std::to_string(mdm.stage_rewards.size()) +
            " epochs, expected " + std::to_string(N));
  if (mdm.terminal_rewards.size() != s)
    rep.add("terminal_rewards has " + std::to_string(mdm.terminal_rewards.size()) +
            " entries, expected " + std::to_string(s));
  for (double r : mdm.terminal_rewards)
    if (!std::isfinite(r)) {
      rep.add("non-finite terminal reward");
      break;
    }

  const std::size_t n_epochs = std::min(N, mdm.actions.size());
  if (mdm.transitions.horizon() != N || mdm.transitions.num_states() != s)
    rep.add("transition function shape does not match the model");

  for (std::size_t n = 0; n < n_epochs; ++n) {
    if (mdm.actions[n].size() != s) {
      rep.add("actions at n=" + std::to_string(n) + " cover " +
              std::to_string(mdm.actions[n].size()) + " states, expected " +
              std::to_string(s));
      continue;
    }
    for (std::size_t i = 0; i < s; ++i) {
      const auto& acts = mdm.actions[n][i];
      if (acts.empty())
        rep.add("empty action set at (n=" + std::to_string(n) + ", state=" +
                mdm.states[i] + ")");
      std::set<std::string> seen;
      for (const auto& a : acts)
        if (!seen.insert(a).second)
          rep.add("duplicate action label '" + a + "' at (n=" + std::to_string(n) +
                  ", state=" + mdm.states[i] + ")");

      if (n < mdm.stage_rewards.size() &&
          (mdm.stage_rewards[n].size() != s || mdm.stage_rewards[n][i].size() != acts.size())) {
        rep.add("stage_rewards shape mismatch at (n=" + std::to_string(n) + ", state=" +
                mdm.states[i] + ")");
      } else if (n < mdm.stage_rewards.size()) {
        for (double r : mdm.stage_rewards[n][i])
          if (!std::isfinite(r))
            rep.add("non-finite stage reward at (n=" + std::to_string(n) + ", state=" +
                    mdm.states[i] + ")");
      }

      if (n >= mdm.transitions.horizon() || mdm.transitions.num_states() != s) continue;
      if (mdm.transitions.num_actions(n, i) != acts.size()) {
        rep.add("transition rows at (n=" + std::to_string(n) + ", state=" + mdm.states[i] +
                ") cover " + std::to_string(mdm.transitions.num_actions(n, i)) +
                " actions, expected " + std::to_string(acts.size()));
        continue;
      }
      for (std::size_t k = 0; k < acts.size(); ++k) {
        const auto& row = mdm.transitions.row(n, i, k);
        double sum = 0.0;
        for (double p : row) {
          if (!(p >= 0.0) || !std::isfinite(p)) {
            rep.add("negative or non-finite probability in row " + triple(mdm, n, i, k));
            break;
          }
          sum += p;
        }
        if (std::abs(sum - 1.0) > kRowRenormTol)
          rep.add("row " + triple(mdm, n, i, k) + " sums to " + std::to_string(sum) +
                  " (deviation " + std::to_string(std::abs(sum - 1.0)) + ")");
      }
    }
  }
  return rep;
}

void require_admissible(const FiniteMdm& mdm, const Strategy& pi) {
  const std::size_t N = std::size_t(mdm.horizon);
  const std::size_t s = mdm.num_states();
  if (pi.action.size() != N)
    throw ValidationError("strategy covers " + std::to_string(pi.action.size()) +
                          " epochs, model horizon is " + std::to_string(N));
  for (std::size_t n = 0; n < N; ++n) {
    if (pi.action[n].size() != s)
      throw ValidationError("strategy at n=" + std::to_string(n) + " covers " +
                            std::to_string(pi.action[n].size()) + " states, expected " +
                            std::to_string(s));
    for (std::size_t i = 0; i < s; ++i) {
      int k = pi.action[n][i];
      if (k < 0 || std::size_t(k) >= mdm.num_actions(n, i))
        throw ValidationError("inadmissible action index " + std::to_string(k) +
                              " at (n=" + std::to_string(n) + ", state=" + mdm.states[i] +
                              ")");
    }
  }
}

namespace {

ValueTables reward_iteration_impl(const FiniteMdm& mdm, const Strategy& pi,
                                  const TransitionFunction& trans) {
  const std::size_t N = std::size_t(mdm.horizon);
  const std::size_t s = mdm.num_states();
  ValueTables out;
  out.v.assign(N + 1, std::vector<double>(s, 0.0));
  out.v[N] = mdm.terminal_rewards;
  for (std::size_t n = N; n-- > 0;) {
    const auto& next = out.v[n + 1];
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t k = std::size_t(pi.action[n][i]);
      const auto& row = trans.row(n, i, k);
      double acc = mdm.stage_rewards[n][i][k];
      for (std::size_t j = 0; j < s; ++j) acc += next[j] * row[j];
      out.v[n][i] = acc;
    }
  }
  return out;
}

}  // namespace

ValueTables reward_iteration(const FiniteMdm& mdm, const Strategy& pi) {
  require_admissible(mdm, pi);
  return reward_iteration_impl(mdm, pi, mdm.transitions);
}

ValueTables reward_iteration_with(const FiniteMdm& mdm, const Strategy& pi,
                                  const TransitionFunction& trans) {
  require_admissible(mdm, pi);
  if (!trans.shape_matches(mdm.transitions))
    throw ValidationError("transition function shape does not match the model");
  return reward_iteration_impl(mdm, pi, trans);
}

BellmanResult bellman_with(const FiniteMdm& mdm, const TransitionFunction& trans,
                           double tie_scale) {
  if (!trans.shape_matches(mdm.transitions))
    throw ValidationError("transition function shape does not match the model");
  const std::size_t N = std::size_t(mdm.horizon);
  const std::size_t s = mdm.num_states();
  const bool maximize = mdm.sense == Sense::Maximize;

  BellmanResult out;
  out.values.v.assign(N + 1, std::vector<double>(s, 0.0));
  out.values.v[N] = mdm.terminal_rewards;
  out.maximizers.assign(N, std::vector<std::vector<int>>(s));

  std::vector<double> q;
  for (std::size_t n = N; n-- > 0;) {
    const auto& next = out.values.v[n + 1];
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t na = mdm.num_actions(n, i);
      q.assign(na, 0.0);
      double best = maximize ? -std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < na; ++k) {
        const auto& row = trans.row(n, i, k);
        double acc = mdm.stage_rewards[n][i][k];
        for (std::size_t j = 0; j < s; ++j) acc += next[j] * row[j];
        q[k] = acc;
        best = maximize ? std::max(best, acc) : std::min(best, acc);
      }
      const double tol = tie_scale * (1.0 + std::abs(best));
      auto& ties = out.maximizers[n][i];
      for (std::size_t k = 0; k < na; ++k)
        if (maximize ? q[k] >= best - tol : q[k] <= best + tol) ties.push_back(int(k));
      out.values.v[n][i] = best;
    }
  }
  return out;
}

BellmanResult bellman(const FiniteMdm& mdm, double tie_scale) {
  return bellman_with(mdm, mdm.transitions, tie_scale);
}

namespace {

// Calls visit(pi) for every strategy in the product of the given per-slot
// candidate sets, in lexicographic (n, state, candidate index) order.
template <typename Visit>
void for_each_strategy(const FiniteMdm& mdm,
                       const std::vector<std::vector<std::vector<int>>>& candidates,
                       Visit&& visit) {
  const std::size_t N = std::size_t(mdm.horizon);
  const std::size_t s = mdm.num_states();
  Strategy pi;
  pi.action.assign(N, std::vector<int>(s, 0));
  std::vector<std::size_t> pick(N * s, 0);
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t i = 0; i < s; ++i) pi.action[n][i] = candidates[n][i][0];

  while (true) {
    visit(pi);
    // advance the rightmost slot (odometer)
    std::size_t slot = N * s;
    while (slot-- > 0) {
      const std::size_t n = slot / s, i = slot % s;
      if (pick[slot] + 1 < candidates[n][i].size()) {
        ++pick[slot];
        pi.action[n][i] = candidates[n][i][pick[slot]];
        break;
      }
      pick[slot] = 0;
      pi.action[n][i] = candidates[n][i][0];
      if (slot == 0) return;
    }
  }
}

std::vector<std::vector<std::vector<int>>> all_action_candidates(const FiniteMdm& mdm) {
  const std::size_t N = std::size_t(mdm.horizon);
  const std::size_t s = mdm.num_states();
  std::vector<std::vector<std::vector<int>>> cand(N, std::vector<std::vector<int>>(s));
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t i = 0; i < s; ++i) {
      cand[n][i].resize(mdm.num_actions(n, i));
      for (std::size_t k = 0; k < cand[n][i].size(); ++k) cand[n][i][k] = int(k);
    }
  return cand;
}

double product_size(const std::vector<std::vector<std::vector<int>>>& cand) {
  double total = 1.0;
  for (const auto& per_state : cand)
    for (const auto& set : per_state) total *= double(set.size());
  return total;
}

}  // namespace

StrategySet enumerate_optimal_strategies(const FiniteMdm& mdm, OptimalEnumMode mode,
                                         std::uint64_t cap, double tie_scale) {
  BellmanResult opt = bellman(mdm, tie_scale);
  StrategySet out;

  if (mode == OptimalEnumMode::MaximizerProduct) {
    out.kind = StrategySetKind::MaximizerProduct;
    double total = product_size(opt.maximizers);
    if (total > double(cap))
      throw CapExceeded("maximizer-product enumeration", total, double(cap));
    for_each_strategy(mdm, opt.maximizers,
                      [&](const Strategy& pi) { out.strategies.push_back(pi); });
    return out;
  }

  out.kind = StrategySetKind::Exact;
  const auto cand = all_action_candidates(mdm);
  double total = product_size(cand);
  if (total > double(cap)) throw CapExceeded("exact strategy enumeration", total, double(cap));

  const auto& v0 = opt.values.v[0];
  const bool maximize = mdm.sense == Sense::Maximize;
  for_each_strategy(mdm, cand, [&](const Strategy& pi) {
    ValueTables val = reward_iteration_impl(mdm, pi, mdm.transitions);
    for (std::size_t i = 0; i < v0.size(); ++i) {
      const double tol = tie_scale * (1.0 + std::abs(v0[i]));
      const double gap = maximize ? v0[i] - val.v[0][i] : val.v[0][i] - v0[i];
      if (gap > tol) return;
    }
    out.strategies.push_back(pi);
  });
  return out;
}

StrategySet enumerate_delta_optimal(const FiniteMdm& mdm, double delta, std::uint64_t cap) {
  if (!(delta >= 0.0)) throw ValidationError("delta must be >= 0");
  BellmanResult opt = bellman(mdm);
  StrategySet out;
  out.kind = StrategySetKind::DeltaOptimal;
  out.delta = delta;

  const auto cand = all_action_candidates(mdm);
  double total = product_size(cand);
  if (total > double(cap))
    throw CapExceeded("delta-optimal enumeration", total, double(cap));

  const auto& v0 = opt.values.v[0];
  const bool maximize = mdm.sense == Sense::Maximize;
  for_each_strategy(mdm, cand, [&](const Strategy& pi) {
    ValueTables val = reward_iteration_impl(mdm, pi, mdm.transitions);
    for (std::size_t i = 0; i < v0.size(); ++i) {
      const double gap = maximize ? v0[i] - val.v[0][i] : val.v[0][i] - v0[i];
      if (gap > delta) return;
    }
    out.strategies.push_back(pi);
  });
  return out;
}

double path_oracle(const FiniteMdm& mdm, const Strategy& pi, std::size_t x0,
                   std::uint64_t cap) {
  require_admissible(mdm, pi);
  if (x0 >= mdm.num_states()) throw ValidationError("initial state index out of range");
  const std::size_t N = std::size_t(mdm.horizon);
  const std::size_t s = mdm.num_states();
  double paths = std::pow(double(s), double(N));
  if (paths > double(cap)) throw CapExceeded("path enumeration", paths, double(cap));

  double total = 0.0;
  // DFS over (time, state) with running probability and reward.
  struct Frame {
    std::size_t n, i;
    double prob, reward;
  };
  std::vector<Frame> stack;
  stack.push_back({0, x0, 1.0, 0.0});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.n == N) {
      total += f.prob * (f.reward + mdm.terminal_rewards[f.i]);
      continue;
    }
    const std::size_t k = std::size_t(pi.action[f.n][f.i]);
    const auto& row = mdm.transitions.row(f.n, f.i, k);
    const double reward = f.reward + mdm.stage_rewards[f.n][f.i][k];
    for (std::size_t j = s; j-- > 0;)  // reversed so DFS visits ascending j first
      stack.push_back({f.n + 1, j, f.prob * row[j], reward});
  }
  return total;
}

double d_inf(const TransitionFunction& P, const TransitionFunction& Q, RowMetric metric,
             std::span<const double> state_points, std::span<const double> phi,
             double alpha) {
  if (!P.shape_matches(Q)) throw ValidationError("d_inf: shapes differ");
  if (!phi.empty() && phi.size() != P.num_states())
    throw ValidationError("d_inf: gauge phi must have one entry per state");
  for (double g : phi)
    if (!(g >= 1.0)) throw ValidationError("d_inf: gauge phi must be >= 1");

  double best = 0.0;
  for (std::size_t n = 0; n < P.horizon(); ++n)
    for (std::size_t i = 0; i < P.num_states(); ++i)
      for (std::size_t k = 0; k < P.num_actions(n, i); ++k) {
        double d = row_distance(P.row(n, i, k), Q.row(n, i, k), metric, state_points, alpha);
        if (!phi.empty()) d /= phi[i];
        best = std::max(best, d);
      }
  return best;
}

}  // namespace mdpsense
