#pragma once

#include <string>
#include <vector>

#include "mdpsense/mdm.hpp"

namespace mdpsense {

/// Economic parameters of the single-product inventory control problem.
/// `demand[n]` is the counting density of the demand in period n (index =
/// units demanded), finitely truncated; a single density is broadcast to all
/// periods.
struct InventorySpec {
  int horizon = 0;   // N
  int capacity = 0;  // K, maximum stock
  double s_rev = 0;  // revenue per unit sold
  double c_ord = 0;  // ordering cost per unit
  double c_fix = 0;  // fixed cost per non-empty order
  double c_hol = 0;  // holding cost per unit in stock
  std::vector<std::vector<double>> demand;

  const std::vector<double>& demand_at(int n) const {
    return demand.size() == 1 ? demand[0] : demand[std::size_t(n)];
  }
  int truncation() const;  // largest representable demand value
};

/// The worked example: N=3, K=4, s_rev=8, c_ord=2, c_fix=4, c_hol=1,
/// demand density (0, 1/4, 1/2, 1/4, 0) each period.
InventorySpec builtin_inventory_spec();

ValidationReport validate_spec(const InventorySpec& spec);

/// State (stock level y, last sales z) <-> index, row-major in (y, z).
std::size_t inventory_state_index(const InventorySpec& spec, int y, int z);
std::string inventory_state_label(int y, int z);

/// Builds the full MDM: states {0..K}^2, actions A(y,z) = {0..K-y},
/// transitions through the demand-aggregation map (sales capped at stock on
/// hand, surplus demand lost), rewards = revenue - ordering - holding,
/// sense = Maximize.
FiniteMdm build_inventory_mdm(const InventorySpec& spec);

/// Direction target: the transition function generated by replacing every
/// period's demand density with the point mass at j. Throws if j exceeds the
/// spec's truncation point.
TransitionFunction demand_direction(const InventorySpec& spec, int j);

}  // namespace mdpsense
