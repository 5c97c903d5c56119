#include "mdpsense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdpsense/errors.hpp"
#include "mdpsense/numerics.hpp"

namespace mdpsense {

namespace {
constexpr double kMergeTol = 1e-12;
constexpr double kMassTol = 1e-9;
}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<std::pair<double, double>> atoms) {
  if (atoms.empty()) throw std::domain_error("DiscreteMeasure: no atoms");
  std::sort(atoms.begin(), atoms.end());
  for (const auto& [x, w] : atoms) {
    if (!std::isfinite(x)) throw std::domain_error("DiscreteMeasure: non-finite point");
    if (!(w >= 0.0)) throw std::domain_error("DiscreteMeasure: negative mass");
    if (!points_.empty() && x - points_.back() <= kMergeTol) {
      masses_.back() += w;
    } else {
      points_.push_back(x);
      masses_.push_back(w);
    }
  }
  double total = 0.0;
  for (double w : masses_) total += w;
  if (std::abs(total - 1.0) > kMassTol)
    throw std::domain_error("DiscreteMeasure: masses sum to " + std::to_string(total));
  for (double& w : masses_) w /= total;
}

double DiscreteMeasure::mass_at(double x) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), x);
  if (it != points_.end() && *it == x) return masses_[std::size_t(it - points_.begin())];
  return 0.0;
}

double DiscreteMeasure::cdf(double t) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), t);
  double acc = 0.0;
  for (std::size_t k = 0; k < std::size_t(it - points_.begin()); ++k) acc += masses_[k];
  return acc;
}

namespace {

std::vector<double> union_points(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<double> pts;
  pts.reserve(mu.size() + nu.size());
  std::merge(mu.points().begin(), mu.points().end(), nu.points().begin(),
             nu.points().end(), std::back_inserter(pts));
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

double d_tv(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  double acc = 0.0;
  for (double x : union_points(mu, nu)) acc += std::abs(mu.mass_at(x) - nu.mass_at(x));
  return std::min(0.5 * acc, 1.0);  // mass roundoff can spill past 1 by an ulp
}

double d_kolm(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  double best = 0.0;
  double fm = 0.0, fn = 0.0;
  for (double x : union_points(mu, nu)) {
    fm += mu.mass_at(x);
    fn += nu.mass_at(x);
    best = std::max(best, std::abs(fm - fn));
  }
  return std::min(best, 1.0);
}

double d_wass1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  auto pts = union_points(mu, nu);
  double acc = 0.0;
  double fm = 0.0, fn = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    fm += mu.mass_at(pts[k]);
    fn += nu.mass_at(pts[k]);
    acc += std::abs(fm - fn) * (pts[k + 1] - pts[k]);
  }
  return acc;
}

double d_hoelder(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::domain_error("d_hoelder: alpha must lie in (0,1]");
  if (mu.size() > 50 || nu.size() > 50)
    throw CapExceeded("d_hoelder support size", double(std::max(mu.size(), nu.size())), 50.0);
  std::vector<std::vector<double>> cost(mu.size(), std::vector<double>(nu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      cost[i][j] = std::pow(std::abs(mu.points()[i] - nu.points()[j]), alpha);
  return numerics::lp_transport(cost, mu.masses(), nu.masses());
}

double row_tv(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::domain_error("row_tv: length mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) acc += std::abs(p[j] - q[j]);
  return 0.5 * acc;
}

double row_distance(std::span<const double> p, std::span<const double> q,
                    RowMetric metric, std::span<const double> points, double alpha) {
  if (metric == RowMetric::Tv) return row_tv(p, q);
  if (points.size() != p.size())
    throw std::domain_error("row_distance: metric needs one real point per state");
  std::vector<std::pair<double, double>> pa, qa;
  pa.reserve(p.size());
  qa.reserve(q.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    pa.emplace_back(points[j], p[j]);
    qa.emplace_back(points[j], q[j]);
  }
  DiscreteMeasure mu(std::move(pa)), nu(std::move(qa));
  switch (metric) {
    case RowMetric::Kolm:
      return d_kolm(mu, nu);
    case RowMetric::Wass1:
      return d_wass1(mu, nu);
    case RowMetric::Hoelder:
      return d_hoelder(mu, nu, alpha);
    default:
      return row_tv(p, q);
  }
}

}  // namespace mdpsense
