// mdpsense command-line front end: validate/solve/evaluate finite Markov
// decision models from JSON, compute mixture-direction sensitivities and
// finite-difference checks, evaluate probability metrics, and run the
// built-in inventory and terminal-wealth demos.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdpsense/finance.hpp"
#include "mdpsense/inventory.hpp"
#include "mdpsense/io.hpp"
#include "mdpsense/mdm.hpp"
#include "mdpsense/metrics.hpp"
#include "mdpsense/sensitivity.hpp"

using nlohmann::ordered_json;
namespace io = mdpsense::io;
using namespace mdpsense;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitCap = 2;
constexpr int kExitIo = 3;

void emit_error(int code, const std::string& kind, const std::string& message,
                const std::vector<std::string>& issues = {}) {
  ordered_json err;
  err["error"]["code"] = code;
  err["error"]["kind"] = kind;
  err["error"]["message"] = message;
  if (!issues.empty()) err["error"]["issues"] = issues;
  std::cerr << err.dump() << "\n";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  out << content;
}

std::uint64_t enumeration_cap() {
  if (const char* env = std::getenv("MDPSENSE_ENUM_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return kDefaultEnumCap;
}

OptimalEnumMode parse_set_mode(const std::string& name) {
  if (name == "exact") return OptimalEnumMode::Exact;
  if (name == "maximizer") return OptimalEnumMode::MaximizerProduct;
  throw ValidationError("unknown strategy set '" + name + "' (use exact|maximizer)");
}

ordered_json rounded_array(const std::vector<double>& xs) {
  ordered_json arr = ordered_json::array();
  for (double x : xs) arr.push_back(io::round4(x));
  return arr;
}

std::size_t resolve_state(const FiniteMdm& mdm, const std::string& label) {
  return mdm.state_index(label);
}

// ---------------------------------------------------------------------- cmds

int cmd_validate(const std::string& model_path) {
  ValidationReport rep = io::validate_model_text(slurp(model_path));
  ordered_json out;
  out["ok"] = rep.ok();
  out["issues"] = rep.issues;
  std::cout << out.dump(2) << "\n";
  if (!rep.ok()) {
    emit_error(kExitValidation, "validation", "model failed validation", rep.issues);
    return kExitValidation;
  }
  return kExitOk;
}

int cmd_solve(const std::string& model_path, const std::string& set_mode,
              double tie_tol) {
  FiniteMdm mdm = io::model_from_json_text(slurp(model_path));
  BellmanResult res = bellman(mdm, tie_tol);

  ordered_json out;
  out["values"] = res.values.v;
  ordered_json maxers = ordered_json::array();
  for (std::size_t n = 0; n < res.maximizers.size(); ++n) {
    ordered_json per_state = ordered_json::array();
    for (std::size_t i = 0; i < res.maximizers[n].size(); ++i) {
      ordered_json labels = ordered_json::array();
      for (int k : res.maximizers[n][i]) labels.push_back(mdm.actions[n][i][std::size_t(k)]);
      per_state.push_back(std::move(labels));
    }
    maxers.push_back(std::move(per_state));
  }
  out["maximizers"] = std::move(maxers);
  out["V0_rounded"] = rounded_array(res.values.v[0]);

  if (set_mode != "none") {
    StrategySet set = enumerate_optimal_strategies(mdm, parse_set_mode(set_mode),
                                                   enumeration_cap(), tie_tol);
    ordered_json strategies = ordered_json::array();
    for (const auto& pi : set.strategies)
      strategies.push_back(ordered_json::parse(io::strategy_to_json_text(mdm, pi, -1)));
    out["optimal_strategies"]["mode"] = set_mode;
    out["optimal_strategies"]["count"] = set.strategies.size();
    out["optimal_strategies"]["strategies"] = std::move(strategies);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& strategy_path) {
  FiniteMdm mdm = io::model_from_json_text(slurp(model_path));
  Strategy pi = io::strategy_from_json_text(mdm, slurp(strategy_path));
  ValueTables v = reward_iteration(mdm, pi);
  ordered_json out;
  out["values"] = v.v;
  out["V0_rounded"] = rounded_array(v.v[0]);
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_sense(const std::string& model_path, const std::string& direction_path,
              const std::string& set_mode, bool breakdown) {
  FiniteMdm mdm = io::model_from_json_text(slurp(model_path));
  TransitionFunction q = io::direction_from_json_text(mdm, slurp(direction_path));
  StrategySet set =
      enumerate_optimal_strategies(mdm, parse_set_mode(set_mode), enumeration_cap());
  SensitivityResult sens = hadamard_optimal(mdm, q, set, breakdown);

  ordered_json out;
  out["strategy_set"] = set_mode;
  out["strategy_count"] = set.strategies.size();
  std::vector<double> derivs;
  ordered_json achieving = ordered_json::array();
  for (const auto& per : sens.per_initial_state) {
    derivs.push_back(per.derivative);
    achieving.push_back(per.achieving_index);
  }
  out["states"] = mdm.states;
  out["derivatives"] = rounded_array(derivs);
  out["derivatives_full"] = derivs;
  out["achieving_strategy_index"] = std::move(achieving);
  ordered_json by_index = ordered_json::object();
  for (const auto& per : sens.per_initial_state)
    by_index[std::to_string(per.achieving_index)] = ordered_json::parse(
        io::strategy_to_json_text(mdm, set.strategies[per.achieving_index], -1));
  out["achieving_strategies"] = std::move(by_index);
  if (breakdown) {
    out["breakdown"] = sens.per_strategy_breakdown;
    ordered_json strategies = ordered_json::array();
    for (const auto& pi : set.strategies)
      strategies.push_back(ordered_json::parse(io::strategy_to_json_text(mdm, pi, -1)));
    out["strategies"] = std::move(strategies);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_fd(const std::string& model_path, const std::string& direction_path,
           const std::vector<double>& eps_grid, const std::string& x0_label,
           const std::string& set_mode) {
  FiniteMdm mdm = io::model_from_json_text(slurp(model_path));
  TransitionFunction q = io::direction_from_json_text(mdm, slurp(direction_path));
  const std::size_t x0 = x0_label.empty() ? 0 : resolve_state(mdm, x0_label);
  std::vector<double> grid = eps_grid;
  if (grid.empty()) grid = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  auto rows = fd_report(mdm, q, grid, x0, parse_set_mode(set_mode), enumeration_cap());
  std::cout << io::fd_rows_to_csv(rows);
  return kExitOk;
}

int cmd_metric(const std::string& a_path, const std::string& b_path,
               const std::string& metric, double alpha) {
  DiscreteMeasure mu = io::measure_from_json_text(slurp(a_path));
  DiscreteMeasure nu = io::measure_from_json_text(slurp(b_path));
  double value = 0.0;
  if (metric == "tv")
    value = d_tv(mu, nu);
  else if (metric == "kolm")
    value = d_kolm(mu, nu);
  else if (metric == "wass1")
    value = d_wass1(mu, nu);
  else if (metric == "hoelder")
    value = d_hoelder(mu, nu, alpha);
  else
    throw ValidationError("unknown metric '" + metric + "'");
  std::cout << io::format_full(value) << "\n";
  return kExitOk;
}

int cmd_inventory(const std::string& spec_path, bool builtin, const std::string& csv_prefix,
                  const std::string& emit_model_path) {
  InventorySpec spec;
  if (builtin || spec_path.empty())
    spec = builtin_inventory_spec();
  else
    spec = io::inventory_spec_from_json_text(slurp(spec_path));

  FiniteMdm mdm = build_inventory_mdm(spec);
  if (!emit_model_path.empty())
    write_file(emit_model_path, io::model_to_json_text(mdm));
  BellmanResult res = bellman(mdm);
  StrategySet set = enumerate_optimal_strategies(mdm, OptimalEnumMode::MaximizerProduct,
                                                 enumeration_cap());
  TransitionFunction q_low = demand_direction(spec, 0);
  TransitionFunction q_high = demand_direction(spec, spec.capacity);
  SensitivityResult s_low = hadamard_optimal(mdm, q_low, set);
  SensitivityResult s_high = hadamard_optimal(mdm, q_high, set);

  // headline tables are indexed by the initial stock level (initial sales 0)
  std::vector<double> v0, d_low, d_high;
  for (int y = 0; y <= spec.capacity; ++y) {
    const std::size_t i = inventory_state_index(spec, y, 0);
    v0.push_back(res.values.v[0][i]);
    d_low.push_back(s_low.per_initial_state[i].derivative);
    d_high.push_back(s_high.per_initial_state[i].derivative);
  }

  ordered_json out;
  out["spec"]["horizon"] = spec.horizon;
  out["spec"]["capacity"] = spec.capacity;
  out["spec"]["s_rev"] = spec.s_rev;
  out["spec"]["c_ord"] = spec.c_ord;
  out["spec"]["c_fix"] = spec.c_fix;
  out["spec"]["c_hol"] = spec.c_hol;
  out["spec"]["demand"] = spec.demand;
  out["levels"] = [&] {
    ordered_json arr = ordered_json::array();
    for (int y = 0; y <= spec.capacity; ++y) arr.push_back(y);
    return arr;
  }();
  out["V0"] = rounded_array(v0);
  out["V0_full"] = v0;
  out["derivative_demand0"] = rounded_array(d_low);
  out["derivative_demand0_full"] = d_low;
  out["derivative_demand_max"] = rounded_array(d_high);
  out["derivative_demand_max_full"] = d_high;
  out["optimal_strategy_count"] = set.strategies.size();
  out["optimal_strategy"] =
      ordered_json::parse(io::strategy_to_json_text(mdm, set.strategies.front(), -1));
  std::cout << out.dump(2) << "\n";

  if (!csv_prefix.empty()) {
    std::string values_csv = "y0,V0,derivative_demand0,derivative_demand_max\n";
    for (int y = 0; y <= spec.capacity; ++y)
      values_csv += std::to_string(y) + "," + io::format_full(v0[std::size_t(y)]) + "," +
                    io::format_full(d_low[std::size_t(y)]) + "," +
                    io::format_full(d_high[std::size_t(y)]) + "\n";
    write_file(csv_prefix + "_values.csv", values_csv);

    std::string strat_csv = "n,y,z,order\n";
    const Strategy& pi = set.strategies.front();
    for (int n = 0; n < spec.horizon; ++n)
      for (int y = 0; y <= spec.capacity; ++y)
        for (int z = 0; z <= spec.capacity; ++z) {
          const std::size_t i = inventory_state_index(spec, y, z);
          strat_csv += std::to_string(n) + "," + std::to_string(y) + "," +
                       std::to_string(z) + "," +
                       mdm.actions[std::size_t(n)][i]
                                  [std::size_t(pi.action[std::size_t(n)][i])] +
                       "\n";
        }
    write_file(csv_prefix + "_strategy.csv", strat_csv);
  }
  return kExitOk;
}

int cmd_finance(const std::string& spec_path, bool builtin_bsm, bool builtin_crr,
                double alpha, double nu, int periods, double x0, double delta,
                const std::vector<int>& jump_periods, const std::string& sweep_path,
                const std::string& csv_path) {
  FinanceModel model;
  if (builtin_bsm)
    model = bsm_model(0.05, 0.2, nu, alpha, periods, x0);
  else if (builtin_crr)
    model = crr_model(0.6, 1.5, 0.5, 1.0, alpha, periods, x0);
  else if (!spec_path.empty())
    model = io::finance_from_json_text(slurp(spec_path));
  else
    throw ValidationError("finance: give a spec file or --builtin-bsm/--builtin-crr");

  if (!sweep_path.empty()) {
    if (!model.bsm)
      throw ValidationError("finance: sweeps need a lognormal-market model");
    FigureSweepSpec sweep = io::sweep_from_json_text(slurp(sweep_path));
    auto rows = figure_sweeps(*model.bsm, model.alpha, model.x0, sweep);
    const std::string csv = io::sweep_rows_to_csv(rows);
    if (csv_path.empty())
      std::cout << csv;
    else
      write_file(csv_path, csv);
    return kExitOk;
  }

  std::vector<double> gammas = optimal_gammas(model);
  std::vector<double> stage(gammas.size());
  for (int n = 0; n < model.periods; ++n)
    stage[std::size_t(n)] = one_stage_value(model, n, gammas[std::size_t(n)]);
  const double value = value_product(model, gammas, 0, model.x0);

  ordered_json out;
  if (model.bsm) {
    out["model"] = {{"kind", "bsm"}, {"mu", model.bsm->mu}, {"sigma", model.bsm->sigma},
                    {"nu", model.bsm->nu}, {"alpha", model.alpha},
                    {"periods", model.periods}, {"x0", model.x0}};
    out["gamma_closed_form"] =
        gamma_bsm(model.bsm->mu, model.bsm->sigma, model.alpha, model.bsm->nu);
  } else if (model.crr) {
    out["model"] = {{"kind", "crr"}, {"p", model.crr->p}, {"u", model.crr->u},
                    {"d", model.crr->d}, {"r", model.crr->r}, {"alpha", model.alpha},
                    {"periods", model.periods}, {"x0", model.x0}};
    out["gamma_closed_form"] =
        gamma_crr(model.crr->p, model.crr->u, model.crr->d, model.crr->r, model.alpha);
  } else {
    out["model"] = {{"kind", "explicit"}, {"alpha", model.alpha},
                    {"periods", model.periods}, {"x0", model.x0}};
  }
  out["gamma"] = gammas;
  out["one_stage_values"] = stage;
  out["value"] = value;
  out["value_rounded"] = io::round4(value);
  const ValidationReport flags = finance_model_flags(model);
  if (!flags.ok()) out["warnings"] = flags.issues;

  if (delta >= 0.0) {
    std::vector<int> periods_used = jump_periods;
    if (periods_used.empty()) periods_used = {0};
    const double deriv =
        hadamard_finance(model, jump_direction(model, delta, periods_used));
    out["jump"]["delta"] = delta;
    out["jump"]["periods"] = periods_used;
    out["jump"]["derivative"] = deriv;
    out["jump"]["derivative_rounded"] = io::round4(deriv);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite Markov decision models: values, strategies, and first-order "
               "sensitivity to transition-function perturbations"};
  app.require_subcommand(1);

  std::string model_path, strategy_path, direction_path, x0_label;
  std::string a_path, b_path, metric_name = "tv", set_mode = "maximizer";
  std::string spec_path, sweep_path, csv_path;
  std::vector<double> eps_grid;
  std::vector<int> jump_periods;
  double alpha = 0.5, nu = 0.03, x0 = 1.0, delta = -1.0, tie_tol = kDefaultTieScale;
  int periods = 12;
  bool builtin_paper = false, builtin_bsm = false, builtin_crr = false;
  bool breakdown = false;

  auto* validate_cmd = app.add_subcommand("validate", "check a model document");
  validate_cmd->add_option("model", model_path)->required();

  auto* solve_cmd = app.add_subcommand("solve", "optimal values and maximizers");
  solve_cmd->add_option("model", model_path)->required();
  solve_cmd->add_option("--strategy-set", set_mode, "none|maximizer|exact");
  solve_cmd->add_option("--tie-tol", tie_tol, "relative optimality tie tolerance");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a fixed strategy");
  eval_cmd->add_option("model", model_path)->required();
  eval_cmd->add_option("strategy", strategy_path)->required();

  auto* sense_cmd = app.add_subcommand("sense", "optimal-value sensitivity");
  sense_cmd->add_option("model", model_path)->required();
  sense_cmd->add_option("direction", direction_path)->required();
  sense_cmd->add_option("--strategy-set", set_mode, "exact|maximizer");
  sense_cmd->add_flag("--breakdown", breakdown, "emit per-strategy derivatives");

  auto* fd_cmd = app.add_subcommand("fd", "finite-difference check (CSV)");
  fd_cmd->add_option("model", model_path)->required();
  fd_cmd->add_option("direction", direction_path)->required();
  fd_cmd->add_option("--eps-grid", eps_grid)->delimiter(',');
  fd_cmd->add_option("--x0", x0_label, "initial state label (default: first state)");
  fd_cmd->add_option("--strategy-set", set_mode, "exact|maximizer");

  auto* metric_cmd = app.add_subcommand("metric", "distance between measures");
  metric_cmd->add_option("a", a_path)->required();
  metric_cmd->add_option("b", b_path)->required();
  metric_cmd->add_option("--metric", metric_name, "tv|kolm|wass1|hoelder");
  metric_cmd->add_option("--alpha", alpha, "Hoelder exponent");

  std::string emit_model_path;
  auto* inv_cmd = app.add_subcommand("inventory", "inventory-control demo");
  inv_cmd->add_option("spec", spec_path);
  inv_cmd->add_flag("--builtin-paper", builtin_paper, "use the built-in example");
  inv_cmd->add_option("--csv", csv_path, "prefix for CSV table output");
  inv_cmd->add_option("--emit-model", emit_model_path,
                      "also write the full model document here");

  auto* fin_cmd = app.add_subcommand("finance", "terminal-wealth demo");
  fin_cmd->add_option("spec", spec_path);
  fin_cmd->add_flag("--builtin-bsm", builtin_bsm, "lognormal market, mu=.05 sigma=.2");
  fin_cmd->add_flag("--builtin-crr", builtin_crr, "two-point market, p=.6 u=1.5 d=.5");
  fin_cmd->add_option("--alpha", alpha, "risk aversion (builtin models)");
  fin_cmd->add_option("--nu", nu, "bond drift (builtin lognormal)");
  fin_cmd->add_option("--periods", periods, "trading periods (builtin models)");
  fin_cmd->add_option("--x0", x0, "initial capital (builtin models)");
  fin_cmd->add_option("--delta", delta, "jump size for the derivative");
  fin_cmd->add_option("--jump-periods", jump_periods)->delimiter(',');
  fin_cmd->add_option("--sweep", sweep_path, "sweep spec (emits CSV)");
  fin_cmd->add_option("--csv", csv_path, "write sweep CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::stringstream ss;
    ss << e.what();
    emit_error(kExitIo, "usage", ss.str());
    return kExitIo;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(model_path);
    if (solve_cmd->parsed()) return cmd_solve(model_path, set_mode, tie_tol);
    if (eval_cmd->parsed()) return cmd_eval(model_path, strategy_path);
    if (sense_cmd->parsed()) return cmd_sense(model_path, direction_path, set_mode, breakdown);
    if (fd_cmd->parsed()) return cmd_fd(model_path, direction_path, eps_grid, x0_label, set_mode);
    if (metric_cmd->parsed()) return cmd_metric(a_path, b_path, metric_name, alpha);
    if (inv_cmd->parsed())
      return cmd_inventory(spec_path, builtin_paper, csv_path, emit_model_path);
    if (fin_cmd->parsed())
      return cmd_finance(spec_path, builtin_bsm, builtin_crr, alpha, nu, periods, x0,
                         delta, jump_periods, sweep_path, csv_path);
  } catch (const CapExceeded& e) {
    emit_error(kExitCap, "cap-exceeded", e.what());
    return kExitCap;
  } catch (const ValidationError& e) {
    emit_error(kExitValidation, "validation", e.what(), e.report.issues);
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    emit_error(kExitIo, "parse", e.what());
    return kExitIo;
  } catch (const std::domain_error& e) {
    emit_error(kExitValidation, "validation", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    emit_error(kExitIo, "io", e.what());
    return kExitIo;
  }
  return kExitOk;
}
