#include "mdpsense/inventory.hpp"

#include <cmath>

namespace mdpsense {

namespace {

// Probability that the sales in one period equal z', given stock-on-hand
// y + a and demand density d: demands beyond the stock aggregate at z' = y+a.
double sales_mass(const std::vector<double>& d, int stock, int z_prime) {
  if (z_prime > stock) return 0.0;
  if (z_prime < stock) {
    return z_prime < int(d.size()) ? d[std::size_t(z_prime)] : 0.0;
  }
  double tail = 0.0;
  for (std::size_t l = std::size_t(z_prime); l < d.size(); ++l) tail += d[l];
  return tail;
}

}  // namespace

int InventorySpec::truncation() const {
  std::size_t len = 0;
  for (const auto& d : demand) len = std::max(len, d.size());
  return int(len) - 1;
}

InventorySpec builtin_inventory_spec() {
  InventorySpec spec;
  spec.horizon = 3;
  spec.capacity = 4;
  spec.s_rev = 8.0;
  spec.c_ord = 2.0;
  spec.c_fix = 4.0;
  spec.c_hol = 1.0;
  spec.demand = {{0.0, 0.25, 0.5, 0.25, 0.0}};
  return spec;
}

ValidationReport validate_spec(const InventorySpec& spec) {
  ValidationReport rep;
  if (spec.horizon < 1) rep.add("inventory horizon must be >= 1");
  if (spec.capacity < 1) rep.add("inventory capacity must be >= 1");
  if (spec.demand.empty()) {
    rep.add("no demand density given");
    return rep;
  }
  if (spec.demand.size() != 1 && int(spec.demand.size()) != spec.horizon)
    rep.add("demand must give one density or one per period");
  for (std::size_t n = 0; n < spec.demand.size(); ++n) {
    double sum = 0.0;
    for (double p : spec.demand[n]) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        rep.add("negative demand mass in period " + std::to_string(n));
        break;
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      rep.add("demand density in period " + std::to_string(n) + " sums to " +
              std::to_string(sum));
  }
  return rep;
}

std::size_t inventory_state_index(const InventorySpec& spec, int y, int z) {
  return std::size_t(y) * std::size_t(spec.capacity + 1) + std::size_t(z);
}

std::string inventory_state_label(int y, int z) {
  return std::to_string(y) + "," + std::to_string(z);
}

namespace {

// Skeleton (states, actions, rewards, row shapes) shared by the base model
// and direction builders.
FiniteMdm inventory_skeleton(const InventorySpec& spec) {
  ValidationReport rep = validate_spec(spec);
  if (!rep.ok()) throw ValidationError(std::move(rep));

  const int K = spec.capacity;
  const int N = spec.horizon;
  const std::size_t s = std::size_t(K + 1) * std::size_t(K + 1);

  FiniteMdm mdm;
  mdm.horizon = N;
  mdm.sense = Sense::Maximize;
  mdm.states.reserve(s);
  for (int y = 0; y <= K; ++y)
    for (int z = 0; z <= K; ++z) mdm.states.push_back(inventory_state_label(y, z));

  const auto u_ord = [&](int a) {
    return a > 0 ? spec.c_fix + spec.c_ord * a : 0.0;
  };
  const auto u_hol = [&](int y, int a) { return spec.c_hol * (y + a); };

  mdm.actions.assign(std::size_t(N), {});
  mdm.stage_rewards.assign(std::size_t(N), {});
  std::vector<std::vector<std::size_t>> counts(static_cast<std::size_t>(N),
                                               std::vector<std::size_t>(s));
  for (int n = 0; n < N; ++n) {
    auto& acts = mdm.actions[std::size_t(n)];
    auto& rews = mdm.stage_rewards[std::size_t(n)];
    acts.resize(s);
    rews.resize(s);
    for (int y = 0; y <= K; ++y)
      for (int z = 0; z <= K; ++z) {
        const std::size_t i = inventory_state_index(spec, y, z);
        for (int a = 0; a <= K - y; ++a) {
          acts[i].push_back(std::to_string(a));
          double r = -u_ord(a) - u_hol(y, a);
          if (n >= 1) r += spec.s_rev * z;  // revenue booked on last sales
          rews[i].push_back(r);
        }
        counts[std::size_t(n)][i] = acts[i].size();
      }
  }

  mdm.terminal_rewards.assign(s, 0.0);
  for (int y = 0; y <= K; ++y)
    for (int z = 0; z <= K; ++z)
      mdm.terminal_rewards[inventory_state_index(spec, y, z)] =
          spec.s_rev * z - u_hol(y, 0);

  mdm.transitions = TransitionFunction(s, counts);
  return mdm;
}

// Fills transition rows for the given per-period demand densities.
void fill_rows(const InventorySpec& spec, FiniteMdm& mdm,
               const std::vector<const std::vector<double>*>& densities,
               TransitionFunction& target) {
  const int K = spec.capacity;
  const std::size_t s = mdm.num_states();
  std::vector<double> row(s);
  for (int n = 0; n < spec.horizon; ++n) {
    const auto& d = *densities[std::size_t(n)];
    for (int y = 0; y <= K; ++y)
      for (int z = 0; z <= K; ++z) {
        const std::size_t i = inventory_state_index(spec, y, z);
        for (int a = 0; a <= K - y; ++a) {
          std::fill(row.begin(), row.end(), 0.0);
          const int stock = y + a;
          for (int zp = 0; zp <= stock; ++zp) {
            double mass = sales_mass(d, stock, zp);
            if (mass != 0.0) row[inventory_state_index(spec, stock - zp, zp)] = mass;
          }
          target.set_row(std::size_t(n), i, std::size_t(a), row);
        }
      }
  }
}

}  // namespace

FiniteMdm build_inventory_mdm(const InventorySpec& spec) {
  FiniteMdm mdm = inventory_skeleton(spec);
  std::vector<const std::vector<double>*> densities;
  for (int n = 0; n < spec.horizon; ++n) densities.push_back(&spec.demand_at(n));
  fill_rows(spec, mdm, densities, mdm.transitions);
  return mdm;
}

TransitionFunction demand_direction(const InventorySpec& spec, int j) {
  if (j < 0 || j > spec.truncation())
    throw ValidationError("demand_direction: demand value " + std::to_string(j) +
                          " exceeds the recorded truncation point " +
                          std::to_string(spec.truncation()));
  FiniteMdm mdm = inventory_skeleton(spec);
  std::vector<double> dirac(std::size_t(j) + 1, 0.0);
  dirac.back() = 1.0;
  std::vector<const std::vector<double>*> densities(std::size_t(spec.horizon), &dirac);
  TransitionFunction out = mdm.transitions;  // correctly shaped, zero rows
  fill_rows(spec, mdm, densities, out);
  return out;
}

}  // namespace mdpsense
