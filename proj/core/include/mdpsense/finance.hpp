#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mdpsense/errors.hpp"

namespace mdpsense {

/// Power utility u_alpha(x) = x^alpha for x >= 0, alpha in (0,1);
/// u_alpha(0) = 0 and u_alpha(1) = 1 exactly.
double u_alpha(double x, double alpha);

/// Return distribution for one period: a sub-probability lognormal part plus
/// finitely many atoms on [0, inf), total mass 1. Pure lognormal and pure
/// discrete measures are the two common cases; the mixture form is what
/// mixture perturbations (1-eps) m + eps delta produce.
struct Measure1D {
  double lognormal_weight = 0.0;
  double m = 0.0;   // lognormal location (used when weight > 0)
  double s2 = 0.0;  // lognormal variance parameter
  std::vector<std::pair<double, double>> atoms;  // (point >= 0, mass)

  static Measure1D lognormal(double m, double s2);
  static Measure1D dirac(double point);
  static Measure1D discrete(std::vector<std::pair<double, double>> atoms);

  double expectation(const std::function<double(double)>& g) const;
  bool operator==(const Measure1D&) const = default;
};

/// (1-eps) p + eps q. Lognormal parts must share parameters (or one of them
/// must be absent) for the mixture to stay representable.
Measure1D mix_measure(const Measure1D& p, const Measure1D& q, double eps);

struct CrrParams {
  double p, u, d, r;
};
struct BsmParams {
  double mu, sigma, nu;
};

/// Terminal-wealth problem datum: N periods, per-period bond growth factors
/// (each >= 1), per-period return distributions, risk aversion alpha in
/// (0,1), initial capital x0 >= 0. Builder provenance is kept for reporting.
struct FinanceModel {
  int periods = 0;
  std::vector<double> rates;        // r_1..r_N
  std::vector<Measure1D> returns;   // m_1..m_N
  double alpha = 0.5;
  double x0 = 1.0;
  std::optional<CrrParams> crr;
  std::optional<BsmParams> bsm;

  double bond_factor(int n) const;  // B_n = prod_{k<n} rates[k], B_0 = 1
};

/// Market-assumption flags for a base model: returns must be positive with
/// probability one and must differ from the bond rate with probability one
/// (otherwise the market admits arbitrage or degenerates). Violations are
/// reported, not rejected; perturbation targets are exempt by design.
ValidationReport finance_model_flags(const FinanceModel& model);

/// Two-point (up/down) return model, identical across periods.
FinanceModel crr_model(double p, double u, double d, double r, double alpha, int periods,
                       double x0);

/// Discretized lognormal market: per-period rate exp(nu/N) and returns
/// LN((mu - sigma^2/2)/N, sigma^2/N).
FinanceModel bsm_model(double mu, double sigma, double nu, double alpha, int periods,
                       double x0);

/// One-stage objective v_n(gamma) = E[u_alpha(1 + gamma (R/r_{n+1} - 1))].
/// Returns exactly 1 at gamma = 0.
double one_stage_value(const FinanceModel& model, int n, double gamma);

/// d/dgamma of the one-stage objective (finite for gamma in [0,1) always and
/// at 1 when the return has no mass at 0).
double one_stage_derivative(const FinanceModel& model, int n, double gamma);

struct GammaSolve {
  double gamma;
  double value;
};

/// Unique maximizer of the one-stage objective on [0,1]: golden-section
/// search refined by bisection on the derivative. Boundary regimes are
/// detected from the derivative sign at 0/1 and return exact 0 or 1; a flat
/// objective reports gamma = 0.
GammaSolve solve_gamma_numeric(const FinanceModel& model, int n);

/// Closed-form optimal fraction in the two-point model; requires
/// 0 < d < r < u, p in [0,1], alpha in (0,1). Clamps to 0 below p_0 and to 1
/// above p_1.
double gamma_crr(double p, double u, double d, double r, double alpha);

/// Merton ratio with clamping: 0 for nu >= mu, (mu-nu)/((1-alpha) sigma^2)
/// between, 1 for nu <= mu - (1-alpha) sigma^2.
double gamma_bsm(double mu, double sigma, double alpha, double nu);

/// Optimal fraction per period (numeric one-stage solve; identical periods
/// are solved once).
std::vector<double> optimal_gammas(const FinanceModel& model);

/// Product of one-stage values from period n on: prod_{k=n}^{N-1} v_k(gamma_k).
double stage_value_product(const FinanceModel& model, const std::vector<double>& gammas,
                           int n);

/// Value of the linear strategy gamma at time n and wealth x:
/// stage_value_product(n) * u_alpha(x / B_n).
double value_product(const FinanceModel& model, const std::vector<double>& gammas, int n,
                     double x);

/// First-order sensitivity of the stage-value product at fixed gammas in the
/// direction of per-period targets Q:
/// sum_k v_{N-1}^P ... (v_k^Q - v_k^P) ... v_0^P.
double frechet_product(const FinanceModel& model, const std::vector<Measure1D>& q_returns,
                       const std::vector<double>& gammas);

/// Sensitivity of the optimal value at x0: frechet_product at the optimal
/// per-period fractions, times u_alpha(x0).
double hadamard_finance(const FinanceModel& model, const std::vector<Measure1D>& q_returns);

/// Per-period targets for jump perturbations: the point mass at delta on the
/// listed periods, the model's own return elsewhere.
std::vector<Measure1D> jump_direction(const FinanceModel& model, double delta,
                                      const std::vector<int>& periods);

/// Forward-difference quotient of the optimal value along the mixture toward
/// q_returns; the perturbed value re-solves gamma per period numerically on
/// the mixed measures.
double finance_fd_quotient(const FinanceModel& model,
                           const std::vector<Measure1D>& q_returns, double eps);

struct SweepRow {
  double alpha, nu, delta;
  int tau_or_ell;
  int horizon;
  double derivative;
};

/// Grid specification for sweep runs; empty grids default to the base model's
/// single value. Exactly one of taus (single jump at period tau) or ells
/// (jumps at periods 0..ell-1) may be non-empty.
struct FigureSweepSpec {
  std::vector<double> alphas, nus, deltas;
  std::vector<int> taus, ells, horizons;
};

/// Derivative rows over the grid (alpha, nu, delta, tau-or-ell, N), holding
/// mu, sigma, x0 from the base model. Rows appear in loop order
/// alpha > nu > delta > tau/ell > N.
std::vector<SweepRow> figure_sweeps(const BsmParams& base, double alpha, double x0,
                                    const FigureSweepSpec& spec);

}  // namespace mdpsense
