#include "mdpsense/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"

namespace mdpsense::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string row_key(const FiniteMdm& mdm, std::size_t n, std::size_t i, std::size_t k) {
  return std::to_string(n) + "/" + mdm.states[i] + "/" + mdm.actions[n][i][k];
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         ValidationReport& rep, const char* where = "document") {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key()))
      rep.add(std::string("unknown key '") + it.key() + "' in " + where);
}

}  // namespace

std::string model_to_json_text(const FiniteMdm& mdm, int indent) {
  ordered_json j;
  j["horizon"] = mdm.horizon;
  j["states"] = mdm.states;
  j["actions"] = mdm.actions;
  ordered_json trans = ordered_json::object();
  ordered_json rewards = ordered_json::object();
  for (std::size_t n = 0; n < mdm.actions.size(); ++n)
    for (std::size_t i = 0; i < mdm.states.size(); ++i)
      for (std::size_t k = 0; k < mdm.actions[n][i].size(); ++k) {
        trans[row_key(mdm, n, i, k)] = mdm.transitions.row(n, i, k);
        rewards[row_key(mdm, n, i, k)] = mdm.stage_rewards[n][i][k];
      }
  j["transitions"] = std::move(trans);
  j["stage_rewards"] = std::move(rewards);
  j["terminal_rewards"] = mdm.terminal_rewards;
  j["sense"] = mdm.sense == Sense::Maximize ? "max" : "min";
  return j.dump(indent) + "\n";
}

namespace {

// Parses the document into an mdm as far as the shape allows, collecting
// every issue. Returns nullopt when the shape is too broken to build.
std::optional<FiniteMdm> parse_model(const json& j, ValidationReport& rep) {
  if (!j.is_object()) {
    rep.add("model document must be a JSON object");
    return std::nullopt;
  }
  reject_unknown_keys(j,
                      {"horizon", "states", "actions", "transitions", "stage_rewards",
                       "terminal_rewards", "sense"},
                      rep, "model document");

  FiniteMdm mdm;
  try {
    mdm.horizon = j.at("horizon").get<int>();
    mdm.states = j.at("states").get<std::vector<std::string>>();
    mdm.actions = j.at("actions").get<std::vector<std::vector<std::vector<std::string>>>>();
    mdm.terminal_rewards = j.at("terminal_rewards").get<std::vector<double>>();
    const std::string sense = j.at("sense").get<std::string>();
    if (sense == "max")
      mdm.sense = Sense::Maximize;
    else if (sense == "min")
      mdm.sense = Sense::Minimize;
    else
      rep.add("sense must be 'max' or 'min', got '" + sense + "'");
    if (!j.at("transitions").is_object()) rep.add("transitions must be an object");
    if (!j.at("stage_rewards").is_object()) rep.add("stage_rewards must be an object");
  } catch (const json::exception& e) {
    rep.add(std::string("model document: ") + e.what());
    return std::nullopt;
  }
  if (!rep.ok()) return std::nullopt;

  for (const auto& lab : mdm.states)
    if (lab.find('/') != std::string::npos)
      rep.add("state label '" + lab + "' must not contain '/'");

  const std::size_t N = mdm.actions.size();
  const std::size_t s = mdm.states.size();
  if (N != std::size_t(std::max(mdm.horizon, 0)))
    rep.add("actions cover " + std::to_string(N) + " epochs, horizon is " +
            std::to_string(mdm.horizon));
  for (std::size_t n = 0; n < N; ++n) {
    if (mdm.actions[n].size() != s) {
      rep.add("actions at n=" + std::to_string(n) + " must list every state");
      return std::nullopt;
    }
    for (std::size_t i = 0; i < s; ++i)
      for (const auto& a : mdm.actions[n][i])
        if (a.find('/') != std::string::npos)
          rep.add("action label '" + a + "' must not contain '/'");
  }
  if (!rep.ok()) return std::nullopt;

  // Shape the containers, then fill rows/rewards from the keyed objects.
  std::vector<std::vector<std::size_t>> counts(N, std::vector<std::size_t>(s, 0));
  mdm.stage_rewards.assign(N, {});
  for (std::size_t n = 0; n < N; ++n) {
    mdm.stage_rewards[n].assign(s, {});
    for (std::size_t i = 0; i < s; ++i) {
      counts[n][i] = mdm.actions[n][i].size();
      mdm.stage_rewards[n][i].assign(counts[n][i], 0.0);
    }
  }
  mdm.transitions = TransitionFunction(s, counts);

  std::set<std::string> missing_transitions, missing_rewards;
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t k = 0; k < mdm.actions[n][i].size(); ++k) {
        missing_transitions.insert(row_key(mdm, n, i, k));
        missing_rewards.insert(row_key(mdm, n, i, k));
      }

  const auto resolve = [&](const std::string& key, std::size_t& n, std::size_t& i,
                           std::size_t& k) -> bool {
    const auto p1 = key.find('/');
    const auto p2 = key.rfind('/');
    if (p1 == std::string::npos || p2 == p1) return false;
    try {
      n = std::size_t(std::stoi(key.substr(0, p1)));
    } catch (...) {
      return false;
    }
    if (n >= N) return false;
    const std::string state = key.substr(p1 + 1, p2 - p1 - 1);
    const std::string action = key.substr(p2 + 1);
    for (i = 0; i < s; ++i)
      if (mdm.states[i] == state) break;
    if (i == s) return false;
    for (k = 0; k < mdm.actions[n][i].size(); ++k)
      if (mdm.actions[n][i][k] == action) return true;
    return false;
  };

  for (const auto* field : {"transitions", "stage_rewards"}) {
    const bool is_transitions = std::string(field) == "transitions";
    auto& missing = is_transitions ? missing_transitions : missing_rewards;
    for (auto it = j.at(field).begin(); it != j.at(field).end(); ++it) {
      std::size_t n = 0, i = 0, k = 0;
      if (!resolve(it.key(), n, i, k)) {
        rep.add(std::string(field) + " key '" + it.key() +
                "' does not name an admissible (epoch/state/action) triple");
        continue;
      }
      try {
        if (is_transitions)
          mdm.transitions.set_row(n, i, k, it.value().get<std::vector<double>>());
        else
          mdm.stage_rewards[n][i][k] = it.value().get<double>();
      } catch (const json::exception& e) {
        rep.add(std::string(field) + " entry '" + it.key() + "': " + e.what());
      } catch (const ValidationError& e) {
        rep.add(std::string(field) + " entry '" + it.key() + "': " + e.what());
      }
      missing.erase(it.key());
    }
  }
  for (const auto& key : missing_transitions)
    rep.add("missing transition row for '" + key + "'");
  for (const auto& key : missing_rewards)
    rep.add("missing stage reward for '" + key + "'");

  ValidationReport numeric = validate(mdm);
  for (auto& issue : numeric.issues) rep.add(std::move(issue));
  return mdm;
}

}  // namespace

FiniteMdm model_from_json_text(std::string_view text) {
  const json j = json::parse(text);
  ValidationReport rep;
  std::optional<FiniteMdm> mdm = parse_model(j, rep);
  if (!rep.ok() || !mdm) throw ValidationError(std::move(rep));
  return std::move(*mdm);
}

ValidationReport validate_model_text(std::string_view text) {
  const json j = json::parse(text);
  ValidationReport rep;
  parse_model(j, rep);
  return rep;
}

Strategy strategy_from_json_text(const FiniteMdm& mdm, std::string_view text) {
  const json j = json::parse(text);
  ValidationReport rep;
  if (!j.is_object() || !j.contains("rules"))
    throw ValidationError("strategy document must be an object with a 'rules' key");
  const auto rules = j.at("rules").get<std::vector<std::vector<std::string>>>();
  if (rules.size() != std::size_t(mdm.horizon))
    throw ValidationError("strategy covers " + std::to_string(rules.size()) +
                          " epochs, model horizon is " + std::to_string(mdm.horizon));
  Strategy pi;
  pi.action.assign(rules.size(), {});
  for (std::size_t n = 0; n < rules.size(); ++n) {
    if (rules[n].size() != mdm.states.size())
      throw ValidationError("strategy rules at n=" + std::to_string(n) +
                            " must list one action per state");
    pi.action[n].assign(mdm.states.size(), 0);
    for (std::size_t i = 0; i < rules[n].size(); ++i) {
      const auto& acts = mdm.actions[n][i];
      const auto it = std::find(acts.begin(), acts.end(), rules[n][i]);
      if (it == acts.end())
        throw ValidationError("strategy names inadmissible action '" + rules[n][i] +
                              "' at (n=" + std::to_string(n) + ", state=" +
                              mdm.states[i] + ")");
      pi.action[n][i] = int(it - acts.begin());
    }
  }
  return pi;
}

std::string strategy_to_json_text(const FiniteMdm& mdm, const Strategy& pi, int indent) {
  ordered_json rules = ordered_json::array();
  for (std::size_t n = 0; n < pi.action.size(); ++n) {
    ordered_json row = ordered_json::array();
    for (std::size_t i = 0; i < pi.action[n].size(); ++i)
      row.push_back(mdm.actions[n][i][std::size_t(pi.action[n][i])]);
    rules.push_back(std::move(row));
  }
  ordered_json j;
  j["rules"] = std::move(rules);
  return j.dump(indent) + "\n";
}

TransitionFunction direction_from_json_text(const FiniteMdm& mdm, std::string_view text) {
  const json j = json::parse(text);
  if (!j.is_object()) throw ValidationError("direction document must be a JSON object");

  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "inventory-demand") {
      InventorySpec spec = j.contains("spec")
                               ? inventory_spec_from_json_text(j.at("spec").dump())
                               : builtin_inventory_spec();
      TransitionFunction q = demand_direction(spec, j.at("j").get<int>());
      if (!q.shape_matches(mdm.transitions))
        throw ValidationError("inventory-demand direction does not match the model shape");
      return q;
    }
    throw ValidationError("unknown direction kind '" + kind + "'");
  }

  if (!j.contains("transitions"))
    throw ValidationError("direction document needs 'transitions' or a builder 'kind'");

  // Full target override: same keying as the model document.
  TransitionFunction q = mdm.transitions;  // copy for shape; all rows replaced
  std::set<std::string> expected;
  for (std::size_t n = 0; n < mdm.actions.size(); ++n)
    for (std::size_t i = 0; i < mdm.states.size(); ++i)
      for (std::size_t k = 0; k < mdm.actions[n][i].size(); ++k)
        expected.insert(row_key(mdm, n, i, k));

  ValidationReport rep;
  for (auto it = j.at("transitions").begin(); it != j.at("transitions").end(); ++it) {
    bool matched = false;
    for (std::size_t n = 0; n < mdm.actions.size() && !matched; ++n)
      for (std::size_t i = 0; i < mdm.states.size() && !matched; ++i)
        for (std::size_t k = 0; k < mdm.actions[n][i].size(); ++k)
          if (row_key(mdm, n, i, k) == it.key()) {
            q.set_row(n, i, k, it.value().get<std::vector<double>>());
            matched = true;
            break;
          }
    if (!matched)
      rep.add("direction row '" + it.key() + "' does not name an admissible triple");
    expected.erase(it.key());
  }
  for (const auto& key : expected) rep.add("direction is missing row '" + key + "'");
  if (!rep.ok()) throw ValidationError(std::move(rep));
  return q;
}

InventorySpec inventory_spec_from_json_text(std::string_view text) {
  const json j = json::parse(text);
  ValidationReport rep;
  if (!j.is_object()) throw ValidationError("inventory spec must be a JSON object");
  reject_unknown_keys(j,
                      {"horizon", "capacity", "s_rev", "c_ord", "c_fix", "c_hol", "demand"},
                      rep, "inventory spec");
  if (!rep.ok()) throw ValidationError(std::move(rep));
  InventorySpec spec;
  try {
    spec.horizon = j.at("horizon").get<int>();
    spec.capacity = j.at("capacity").get<int>();
    spec.s_rev = j.at("s_rev").get<double>();
    spec.c_ord = j.at("c_ord").get<double>();
    spec.c_fix = j.at("c_fix").get<double>();
    spec.c_hol = j.at("c_hol").get<double>();
    spec.demand = j.at("demand").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("inventory spec: ") + e.what());
  }
  ValidationReport check = validate_spec(spec);
  if (!check.ok()) throw ValidationError(std::move(check));
  return spec;
}

DiscreteMeasure measure_from_json_text(std::string_view text) {
  const json j = json::parse(text);
  if (!j.is_object() || !j.contains("atoms"))
    throw ValidationError("measure document must be an object with an 'atoms' key");
  try {
    auto atoms = j.at("atoms").get<std::vector<std::pair<double, double>>>();
    return DiscreteMeasure(std::move(atoms));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("measure document: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ValidationError(std::string("measure document: ") + e.what());
  }
}

namespace {

Measure1D measure1d_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "lognormal")
    return Measure1D::lognormal(j.at("m").get<double>(), j.at("s2").get<double>());
  if (kind == "dirac") return Measure1D::dirac(j.at("point").get<double>());
  if (kind == "discrete")
    return Measure1D::discrete(j.at("atoms").get<std::vector<std::pair<double, double>>>());
  throw ValidationError("unknown measure kind '" + kind + "'");
}

}  // namespace

FinanceModel finance_from_json_text(std::string_view text) {
  const json j = json::parse(text);
  if (!j.is_object() || !j.contains("kind"))
    throw ValidationError("finance document must be an object with a 'kind' key");
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const double alpha = j.at("alpha").get<double>();
    const double x0 = j.value("x0", 1.0);
    if (kind == "bsm")
      return bsm_model(j.at("mu").get<double>(), j.at("sigma").get<double>(),
                       j.at("nu").get<double>(), alpha, j.at("periods").get<int>(), x0);
    if (kind == "crr")
      return crr_model(j.at("p").get<double>(), j.at("u").get<double>(),
                       j.at("d").get<double>(), j.at("r").get<double>(), alpha,
                       j.at("periods").get<int>(), x0);
    if (kind == "explicit") {
      FinanceModel model;
      model.rates = j.at("rates").get<std::vector<double>>();
      for (const auto& mj : j.at("returns")) model.returns.push_back(measure1d_from(mj));
      model.periods = int(model.rates.size());
      model.alpha = alpha;
      model.x0 = x0;
      if (model.returns.size() != model.rates.size())
        throw ValidationError("finance document: rates and returns lengths differ");
      for (double r : model.rates)
        if (!(r >= 1.0)) throw ValidationError("finance document: rates must be >= 1");
      return model;
    }
    throw ValidationError("unknown finance model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("finance document: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ValidationError(std::string("finance document: ") + e.what());
  }
}

FigureSweepSpec sweep_from_json_text(std::string_view text) {
  const json j = json::parse(text);
  ValidationReport rep;
  if (!j.is_object()) throw ValidationError("sweep document must be a JSON object");
  reject_unknown_keys(j, {"alphas", "nus", "deltas", "taus", "ells", "horizons"}, rep,
                      "sweep document");
  if (!rep.ok()) throw ValidationError(std::move(rep));
  FigureSweepSpec spec;
  try {
    if (j.contains("alphas")) spec.alphas = j.at("alphas").get<std::vector<double>>();
    if (j.contains("nus")) spec.nus = j.at("nus").get<std::vector<double>>();
    if (j.contains("deltas")) spec.deltas = j.at("deltas").get<std::vector<double>>();
    if (j.contains("taus")) spec.taus = j.at("taus").get<std::vector<int>>();
    if (j.contains("ells")) spec.ells = j.at("ells").get<std::vector<int>>();
    if (j.contains("horizons")) spec.horizons = j.at("horizons").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("sweep document: ") + e.what());
  }
  return spec;
}

std::string format_full(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip
  return std::string(buf, end);
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

std::string fd_rows_to_csv(const std::vector<FdRow>& rows) {
  std::string out = "eps,quotient,abs_error\n";
  for (const auto& r : rows)
    out += format_full(r.eps) + "," + format_full(r.quotient) + "," +
           format_full(r.abs_error) + "\n";
  return out;
}

std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "alpha,nu,delta,tau_or_ell,N,derivative\n";
  for (const auto& r : rows)
    out += format_full(r.alpha) + "," + format_full(r.nu) + "," + format_full(r.delta) +
           "," + std::to_string(r.tau_or_ell) + "," + std::to_string(r.horizon) + "," +
           format_full(r.derivative) + "\n";
  return out;
}

}  // namespace mdpsense::io
