#include "mdpsense/finance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdpsense/numerics.hpp"

namespace mdpsense {

namespace {
// Derivative values within this of zero at the boundary count as boundary
// regimes; covers quadrature roundoff so exact-threshold inputs snap to 0/1.
constexpr double kFocBoundaryTol = 1e-12;
}  // namespace

double u_alpha(double x, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("u_alpha: alpha must lie in (0,1)");
  if (x < 0.0) throw std::domain_error("u_alpha: negative argument");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  return std::exp(alpha * std::log(x));
}

Measure1D Measure1D::lognormal(double m, double s2) {
  if (!(s2 > 0.0)) throw std::domain_error("Measure1D: lognormal needs s2 > 0");
  Measure1D out;
  out.lognormal_weight = 1.0;
  out.m = m;
  out.s2 = s2;
  return out;
}

Measure1D Measure1D::dirac(double point) {
  return discrete({{point, 1.0}});
}

Measure1D Measure1D::discrete(std::vector<std::pair<double, double>> atoms) {
  Measure1D out;
  double total = 0.0;
  for (auto& [x, w] : atoms) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::domain_error("Measure1D: atoms must lie on [0,inf)");
    if (!(w >= 0.0)) throw std::domain_error("Measure1D: negative mass");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::domain_error("Measure1D: masses sum to " + std::to_string(total));
  out.atoms = std::move(atoms);
  return out;
}

double Measure1D::expectation(const std::function<double(double)>& g) const {
  double acc = 0.0;
  if (lognormal_weight > 0.0)
    acc += lognormal_weight * numerics::lognormal_expectation(g, m, std::sqrt(s2));
  for (const auto& [x, w] : atoms) acc += w * g(x);
  return acc;
}

Measure1D mix_measure(const Measure1D& p, const Measure1D& q, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::domain_error("mix_measure: eps must lie in [0,1]");
  Measure1D out;
  out.lognormal_weight = (1.0 - eps) * p.lognormal_weight + eps * q.lognormal_weight;
  if (out.lognormal_weight > 0.0) {
    if (p.lognormal_weight > 0.0 && q.lognormal_weight > 0.0 &&
        (p.m != q.m || p.s2 != q.s2))
      throw std::domain_error("mix_measure: incompatible lognormal parts");
    const Measure1D& src = p.lognormal_weight > 0.0 ? p : q;
    out.m = src.m;
    out.s2 = src.s2;
  }
  for (const auto& [x, w] : p.atoms) out.atoms.emplace_back(x, (1.0 - eps) * w);
  for (const auto& [x, w] : q.atoms) out.atoms.emplace_back(x, eps * w);
  return out;
}

double FinanceModel::bond_factor(int n) const {
  double b = 1.0;
  for (int k = 0; k < n; ++k) b *= rates[std::size_t(k)];
  return b;
}

ValidationReport finance_model_flags(const FinanceModel& model) {
  ValidationReport rep;
  if (!(model.alpha > 0.0 && model.alpha < 1.0))
    rep.add("risk aversion alpha must lie in (0,1)");
  if (!(model.x0 >= 0.0)) rep.add("initial capital must be >= 0");
  if (model.rates.size() != std::size_t(model.periods) ||
      model.returns.size() != std::size_t(model.periods)) {
    rep.add("rates/returns arrays do not match the period count");
    return rep;
  }
  for (int n = 0; n < model.periods; ++n) {
    const double r = model.rates[std::size_t(n)];
    if (!(r >= 1.0)) rep.add("bond rate below 1 in period " + std::to_string(n));
    for (const auto& [x, w] : model.returns[std::size_t(n)].atoms) {
      if (w <= 0.0) continue;
      if (x == 0.0)
        rep.add("return can vanish in period " + std::to_string(n));
      if (x == r)
        rep.add("return equals the bond rate with positive probability in period " +
                std::to_string(n));
    }
  }
  return rep;
}

FinanceModel crr_model(double p, double u, double d, double r, double alpha, int periods,
                       double x0) {
  if (!(0.0 < d && d < r && r < u))
    throw std::domain_error("crr_model: need 0 < d < r < u");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("crr_model: p outside [0,1]");
  if (periods < 1) throw std::domain_error("crr_model: periods must be >= 1");
  FinanceModel model;
  model.periods = periods;
  model.rates.assign(std::size_t(periods), r);
  model.returns.assign(std::size_t(periods),
                       Measure1D::discrete({{d, 1.0 - p}, {u, p}}));
  model.alpha = alpha;
  model.x0 = x0;
  model.crr = CrrParams{p, u, d, r};
  return model;
}

FinanceModel bsm_model(double mu, double sigma, double nu, double alpha, int periods,
                       double x0) {
  if (!(sigma > 0.0)) throw std::domain_error("bsm_model: sigma must be > 0");
  if (!(mu >= 0.0 && nu >= 0.0)) throw std::domain_error("bsm_model: mu, nu must be >= 0");
  if (periods < 1) throw std::domain_error("bsm_model: periods must be >= 1");
  const double n = double(periods);
  FinanceModel model;
  model.periods = periods;
  model.rates.assign(std::size_t(periods), std::exp(nu / n));
  model.returns.assign(std::size_t(periods),
                       Measure1D::lognormal((mu - sigma * sigma / 2.0) / n,
                                            sigma * sigma / n));
  model.alpha = alpha;
  model.x0 = x0;
  model.bsm = BsmParams{mu, sigma, nu};
  return model;
}

namespace {

void check_period(const FinanceModel& model, int n) {
  if (n < 0 || n >= model.periods)
    throw std::domain_error("finance: period index out of range");
  if (model.rates.size() != std::size_t(model.periods) ||
      model.returns.size() != std::size_t(model.periods))
    throw std::domain_error("finance: model arrays do not match the period count");
}

double stage_value(const Measure1D& ret, double rate, double alpha, double gamma) {
  if (gamma == 0.0) return 1.0;  // u_alpha(1), independent of the measure
  return ret.expectation([&](double y) {
    return u_alpha(1.0 + gamma * (y / rate - 1.0), alpha);
  });
}

double stage_derivative(const Measure1D& ret, double rate, double alpha, double gamma) {
  return ret.expectation([&](double y) {
    const double w = y / rate - 1.0;
    const double base = 1.0 + gamma * w;
    return alpha * w * std::pow(base, alpha - 1.0);
  });
}

GammaSolve solve_stage(const Measure1D& ret, double rate, double alpha) {
  const auto f = [&](double g) { return stage_value(ret, rate, alpha, g); };
  const auto fp = [&](double g) { return stage_derivative(ret, rate, alpha, g); };

  // Boundary regimes from the derivative sign; the objective is strictly
  // concave, so these conditions are exact (flat objectives land on 0).
  const double d0 = fp(0.0);
  if (d0 <= kFocBoundaryTol) return {0.0, 1.0};
  const double d1 = fp(1.0);
  if (std::isfinite(d1) && d1 >= -kFocBoundaryTol) return {1.0, f(1.0)};

  numerics::MaxResult coarse = numerics::maximize_concave_01(f, 1e-8);
  // Golden-section stalls at the quadrature noise floor near the flat top;
  // polish by bisecting the strictly decreasing derivative.
  double lo = std::max(coarse.arg - 1e-4, 0.0);
  double hi = std::min(coarse.arg + 1e-4, 1.0);
  if (!(fp(lo) > 0.0) || !(fp(hi) < 0.0)) {
    lo = 0.0;
    hi = 1.0;
  }
  // Endpoints excluded: walk the bracket by midpoints only.
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g = fp(mid);
    if (g > 0.0)
      lo = mid;
    else if (g < 0.0)
      hi = mid;
    else
      return {mid, f(mid)};
  }
  const double gamma = 0.5 * (lo + hi);
  return {gamma, f(gamma)};
}

}  // namespace

double one_stage_value(const FinanceModel& model, int n, double gamma) {
  check_period(model, n);
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::domain_error("one_stage_value: gamma outside [0,1]");
  return stage_value(model.returns[std::size_t(n)], model.rates[std::size_t(n)],
                     model.alpha, gamma);
}

double one_stage_derivative(const FinanceModel& model, int n, double gamma) {
  check_period(model, n);
  return stage_derivative(model.returns[std::size_t(n)], model.rates[std::size_t(n)],
                          model.alpha, gamma);
}

GammaSolve solve_gamma_numeric(const FinanceModel& model, int n) {
  check_period(model, n);
  return solve_stage(model.returns[std::size_t(n)], model.rates[std::size_t(n)],
                     model.alpha);
}

double gamma_crr(double p, double u, double d, double r, double alpha) {
  if (!(0.0 < d && d < r && r < u))
    throw std::domain_error("gamma_crr: need 0 < d < r < u");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("gamma_crr: p outside [0,1]");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("gamma_crr: alpha outside (0,1)");

  const double p0 = (r - d) / (u - d);
  const double p1 = std::pow(u, 1.0 - alpha) * (r - d) /
                    (std::pow(u, 1.0 - alpha) * (r - d) +
                     std::pow(d, 1.0 - alpha) * (u - r));
  if (p <= p0) return 0.0;
  if (p >= p1) return 1.0;

  const double kappa = 1.0 / (1.0 - alpha);
  const double upk = std::pow(p, kappa), dpk = std::pow(1.0 - p, kappa);
  const double ur = u - r, rd = r - d;
  const double num = upk * std::pow(ur, kappa) - dpk * std::pow(rd, kappa);
  const double den = upk * std::pow(ur, kappa * alpha) + dpk * std::pow(rd, kappa * alpha);
  return r / (rd * ur) * num / den;
}

double gamma_bsm(double mu, double sigma, double alpha, double nu) {
  if (!(sigma > 0.0)) throw std::domain_error("gamma_bsm: sigma must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("gamma_bsm: alpha outside (0,1)");
  if (!(mu >= 0.0 && nu >= 0.0)) throw std::domain_error("gamma_bsm: mu, nu must be >= 0");
  if (nu >= mu) return 0.0;
  const double threshold = mu - (1.0 - alpha) * sigma * sigma;
  if (nu <= threshold) return 1.0;
  return (mu - nu) / ((1.0 - alpha) * sigma * sigma);
}

std::vector<double> optimal_gammas(const FinanceModel& model) {
  std::vector<double> gammas(std::size_t(model.periods), 0.0);
  std::optional<GammaSolve> shared;
  for (int n = 0; n < model.periods; ++n) {
    const bool same_as_first = n > 0 &&
                               model.returns[std::size_t(n)] == model.returns[0] &&
                               model.rates[std::size_t(n)] == model.rates[0];
    if (same_as_first && shared) {
      gammas[std::size_t(n)] = shared->gamma;
      continue;
    }
    GammaSolve sol = solve_gamma_numeric(model, n);
    if (n == 0) shared = sol;
    gammas[std::size_t(n)] = sol.gamma;
  }
  return gammas;
}

namespace {

std::vector<double> stage_values(const FinanceModel& model,
                                 const std::vector<double>& gammas) {
  if (gammas.size() != std::size_t(model.periods))
    throw std::domain_error("finance: gamma vector length mismatch");
  std::vector<double> v(std::size_t(model.periods));
  for (int n = 0; n < model.periods; ++n) {
    if (!(gammas[std::size_t(n)] >= 0.0 && gammas[std::size_t(n)] <= 1.0))
      throw std::domain_error("finance: gamma outside [0,1]");
    v[std::size_t(n)] = one_stage_value(model, n, gammas[std::size_t(n)]);
  }
  return v;
}

}  // namespace

double stage_value_product(const FinanceModel& model, const std::vector<double>& gammas,
                           int n) {
  if (n < 0 || n > model.periods)
    throw std::domain_error("stage_value_product: n outside 0..N");
  const std::vector<double> v = stage_values(model, gammas);
  double prod = 1.0;
  for (int k = n; k < model.periods; ++k) prod *= v[std::size_t(k)];
  return prod;
}

double value_product(const FinanceModel& model, const std::vector<double>& gammas, int n,
                     double x) {
  return stage_value_product(model, gammas, n) *
         u_alpha(x / model.bond_factor(n), model.alpha);
}

double frechet_product(const FinanceModel& model, const std::vector<Measure1D>& q_returns,
                       const std::vector<double>& gammas) {
  if (q_returns.size() != std::size_t(model.periods))
    throw std::domain_error("frechet_product: direction length mismatch");
  const std::vector<double> vp = stage_values(model, gammas);

  FinanceModel q_model = model;
  q_model.returns = q_returns;
  const std::vector<double> vq = stage_values(q_model, gammas);

  // prefix[k] = prod_{j<k} vp, suffix[k] = prod_{j>k} vp
  const std::size_t N = vp.size();
  std::vector<double> prefix(N, 1.0), suffix(N, 1.0);
  for (std::size_t k = 1; k < N; ++k) prefix[k] = prefix[k - 1] * vp[k - 1];
  for (std::size_t k = N - 1; k-- > 0;) suffix[k] = suffix[k + 1] * vp[k + 1];

  double acc = 0.0;
  for (std::size_t k = 0; k < N; ++k)
    acc += prefix[k] * (vq[k] - vp[k]) * suffix[k];
  return acc;
}

double hadamard_finance(const FinanceModel& model,
                        const std::vector<Measure1D>& q_returns) {
  const std::vector<double> gammas = optimal_gammas(model);
  return frechet_product(model, q_returns, gammas) * u_alpha(model.x0, model.alpha);
}

std::vector<Measure1D> jump_direction(const FinanceModel& model, double delta,
                                      const std::vector<int>& periods) {
  if (!(delta >= 0.0)) throw std::domain_error("jump_direction: delta must be >= 0");
  std::vector<Measure1D> out = model.returns;
  for (int tau : periods) {
    if (tau < 0 || tau >= model.periods)
      throw std::domain_error("jump_direction: period out of range");
    out[std::size_t(tau)] = Measure1D::dirac(delta);
  }
  return out;
}

double finance_fd_quotient(const FinanceModel& model,
                           const std::vector<Measure1D>& q_returns, double eps) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::domain_error("finance_fd_quotient: eps outside (0,1]");
  if (q_returns.size() != std::size_t(model.periods))
    throw std::domain_error("finance_fd_quotient: direction length mismatch");

  FinanceModel mixed = model;
  mixed.crr.reset();
  mixed.bsm.reset();
  for (int n = 0; n < model.periods; ++n)
    mixed.returns[std::size_t(n)] =
        mix_measure(model.returns[std::size_t(n)], q_returns[std::size_t(n)], eps);

  const double base =
      stage_value_product(model, optimal_gammas(model), 0) * u_alpha(model.x0, model.alpha);
  const double pert = stage_value_product(mixed, optimal_gammas(mixed), 0) *
                      u_alpha(model.x0, model.alpha);
  return (pert - base) / eps;
}

std::vector<SweepRow> figure_sweeps(const BsmParams& base, double alpha, double x0,
                                    const FigureSweepSpec& spec) {
  if (!spec.taus.empty() && !spec.ells.empty())
    throw std::domain_error("figure_sweeps: give taus or ells, not both");

  const std::vector<double> alphas = spec.alphas.empty() ? std::vector<double>{alpha}
                                                         : spec.alphas;
  const std::vector<double> nus = spec.nus.empty() ? std::vector<double>{base.nu}
                                                   : spec.nus;
  const std::vector<double> deltas = spec.deltas.empty() ? std::vector<double>{0.5}
                                                         : spec.deltas;
  const std::vector<int> horizons = spec.horizons.empty() ? std::vector<int>{12}
                                                          : spec.horizons;
  const bool multi = !spec.ells.empty();
  std::vector<int> jump_list = multi ? spec.ells : spec.taus;
  if (jump_list.empty()) jump_list = {0};

  std::vector<SweepRow> rows;
  for (double a : alphas)
    for (double nu : nus)
      for (double delta : deltas)
        for (int j : jump_list)
          for (int N : horizons) {
            FinanceModel model = bsm_model(base.mu, base.sigma, nu, a, N, x0);
            std::vector<int> periods;
            if (multi) {
              if (j < 1 || j > N)
                throw std::domain_error("figure_sweeps: ell outside 1..N");
              for (int t = 0; t < j; ++t) periods.push_back(t);
            } else {
              periods.push_back(j);
            }
            const double deriv =
                hadamard_finance(model, jump_direction(model, delta, periods));
            rows.push_back({a, nu, delta, j, N, deriv});
          }
  return rows;
}

}  // namespace mdpsense
