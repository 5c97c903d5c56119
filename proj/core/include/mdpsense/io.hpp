#pragma once

#include <string>
#include <string_view>

#include "mdpsense/finance.hpp"
#include "mdpsense/inventory.hpp"
#include "mdpsense/mdm.hpp"
#include "mdpsense/metrics.hpp"
#include "mdpsense/sensitivity.hpp"

namespace mdpsense::io {

// Model documents. Keys: "horizon", "states", "actions" (nested arrays per
// epoch per state), "transitions" and "stage_rewards" (objects keyed
// "n/state/action"), "terminal_rewards", "sense" ("max"|"min"). Unknown keys
// are rejected. State and action labels must not contain '/'.

std::string model_to_json_text(const FiniteMdm& mdm, int indent = 2);

/// Parses and fully validates; throws ValidationError with the collected
/// report on any schema or numeric violation.
FiniteMdm model_from_json_text(std::string_view text);

/// Parse plus validation without throwing on model defects: the report lists
/// every issue (malformed JSON still throws).
ValidationReport validate_model_text(std::string_view text);

// Strategy documents: {"rules": [[action label per state] per epoch]}.
Strategy strategy_from_json_text(const FiniteMdm& mdm, std::string_view text);
std::string strategy_to_json_text(const FiniteMdm& mdm, const Strategy& pi,
                                  int indent = 2);

// Direction documents: either {"transitions": {...}} (a full target Q) or a
// builder spec {"kind":"inventory-demand","j":int,"spec":{...optional...}}
// (builtin inventory spec when omitted).
TransitionFunction direction_from_json_text(const FiniteMdm& mdm, std::string_view text);

// Inventory spec documents: {"horizon","capacity","s_rev","c_ord","c_fix",
// "c_hol","demand":[[...]]} (one density or one per period).
InventorySpec inventory_spec_from_json_text(std::string_view text);

// Discrete measures for the metric command: {"atoms": [[point, mass], ...]}.
DiscreteMeasure measure_from_json_text(std::string_view text);

// Finance documents: {"kind":"bsm","mu","sigma","nu","alpha","periods","x0"},
// {"kind":"crr","p","u","d","r","alpha","periods","x0"}, or
// {"kind":"explicit","rates":[...],"returns":[measure...],"alpha","x0"}.
// Measures: {"kind":"lognormal","m","s2"} | {"kind":"dirac","point"} |
// {"kind":"discrete","atoms":[[x,w],...]}.
FinanceModel finance_from_json_text(std::string_view text);

// Sweep documents: {"alphas":[],"nus":[],"deltas":[],"taus":[]|"ells":[],
// "horizons":[]}; empty/missing grids default to the base model value.
FigureSweepSpec sweep_from_json_text(std::string_view text);

// CSV emission (header + rows, "%.17g" numbers, '\n' line ends).
std::string fd_rows_to_csv(const std::vector<FdRow>& rows);
std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows);

/// Shortest round-trip representation of a double (matches JSON output).
std::string format_full(double v);
/// Fixed 4-decimal display rounding used for table companions.
double round4(double v);

}  // namespace mdpsense::io
