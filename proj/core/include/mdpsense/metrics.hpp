#pragma once

#include <span>
#include <utility>
#include <vector>

namespace mdpsense {

/// Finitely supported probability measure on the real line in canonical form:
/// atoms sorted by point, points within 1e-12 merged, masses summing to 1
/// (inputs with |sum - 1| <= 1e-9 are renormalized, larger deviations throw).
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<std::pair<double, double>> atoms);

  static DiscreteMeasure dirac(double point) { return DiscreteMeasure({{point, 1.0}}); }

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }
  std::size_t size() const { return points_.size(); }

  /// Mass of {x} (exact point lookup).
  double mass_at(double x) const;
  /// Distribution function F(t) = mu((-inf, t]).
  double cdf(double t) const;

 private:
  std::vector<double> points_;
  std::vector<double> masses_;
};

/// Total variation distance, (1/2) sum |mu{x} - nu{x}| over the union support.
double d_tv(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Kolmogorov distance sup_t |F_mu(t) - F_nu(t)|.
double d_kolm(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// L1-Wasserstein (Kantorovich) distance via the CDF-area formula.
double d_wass1(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Hoelder-alpha integral probability metric, alpha in (0,1]: the optimal
/// transport value with cost |x-y|^alpha, solved as a dense LP over the joint
/// support. Supports are capped at 50 atoms each. Coincides with d_wass1 at
/// alpha = 1.
double d_hoelder(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double alpha);

/// Pointwise total variation between two stochastic vectors.
double row_tv(std::span<const double> p, std::span<const double> q);

enum class RowMetric { Tv, Kolm, Wass1, Hoelder };

/// Distance between two rows under the chosen metric. For metrics that need
/// geometry, `points` carries the real value of each state (same indexing as
/// the rows); it may be empty for Tv.
double row_distance(std::span<const double> p, std::span<const double> q,
                    RowMetric metric, std::span<const double> points,
                    double alpha = 1.0);

}  // namespace mdpsense
