#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mdpsense::numerics {

struct MaxResult {
  double arg;
  double value;
};

/// Golden-section search for the maximum of a concave (unimodal) function on
/// [0,1]. The returned argument is within `tol` of the true maximizer.
/// Throws std::domain_error on non-finite function values.
MaxResult maximize_concave_01(const std::function<double(double)>& f,
                              double tol = 1e-10);

/// Root of a strictly decreasing function on [lo,hi] by bisection.
/// Requires g(lo) >= 0 >= g(hi). Returns the midpoint of the final bracket.
double bisect_decreasing_root(const std::function<double(double)>& g,
                              double lo, double hi, int iterations = 200);

/// Gauss-Hermite rule for weight exp(-x^2) on the real line.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes/weights of the n-point Gauss-Hermite rule (Newton on the
/// orthonormal recurrence). Cached for the default order.
GaussHermiteRule gauss_hermite(int n);
const GaussHermiteRule& gauss_hermite_default();  // 200 nodes

/// Integral of g against the lognormal LN(m, s^2) via Gauss-Hermite after the
/// substitution y = exp(m + s z). Relative accuracy ~1e-12 for smooth g of at
/// most linear growth. Throws std::domain_error on non-finite terms.
double lognormal_expectation(const std::function<double(double)>& g, double m,
                             double s);

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF, |error| <= 1e-9 on (0,1) (rational
/// approximation plus one Halley refinement). Throws std::domain_error for
/// t outside (0,1).
double normal_quantile(double t);

/// Upper-tail quantile F^{-1}(1 - t) = -normal_quantile(t); exact even when
/// 1 - t is not representable (t below ~1e-16).
double normal_quantile_complement(double t);

/// Quantile of LN(m, s^2): exp(m + s * normal_quantile(t)).
double lognormal_quantile(double t, double m, double s);
/// Upper-tail lognormal quantile F^{-1}(1 - t).
double lognormal_quantile_complement(double t, double m, double s);

/// Optimal-transport value between masses mu (size m) and nu (size n) under
/// the given m-by-n cost matrix, by the transportation simplex. Marginals must
/// have equal totals (tolerance 1e-9; nu is rescaled to match exactly).
/// Dimensions are capped at 50x50 (CapExceeded beyond).
double lp_transport(const std::vector<std::vector<double>>& cost,
                    std::span<const double> mu, std::span<const double> nu);

}  // namespace mdpsense::numerics
