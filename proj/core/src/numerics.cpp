#include "mdpsense/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mdpsense/errors.hpp"

namespace mdpsense::numerics {

namespace {

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw std::domain_error(std::string("non-finite value in ") + what);
  return v;
}

}  // namespace

MaxResult maximize_concave_01(const std::function<double(double)>& f, double tol) {
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;   // 0.618...
  static const double invphi2 = (3.0 - std::sqrt(5.0)) / 2.0;  // 1 - invphi

  double a = 0.0, b = 1.0;
  double h = b - a;
  double c = a + invphi2 * h;
  double d = a + invphi * h;
  double fc = checked(f(c), "maximize_concave_01");
  double fd = checked(f(d), "maximize_concave_01");

  for (int it = 0; it < 200 && h > tol; ++it) {
    if (fc >= fd) {  // ties move left, so flat objectives settle at 0
      b = d;
      d = c;
      fd = fc;
      h = b - a;
      c = a + invphi2 * h;
      fc = checked(f(c), "maximize_concave_01");
    } else {
      a = c;
      c = d;
      fc = fd;
      h = b - a;
      d = a + invphi * h;
      fd = checked(f(d), "maximize_concave_01");
    }
  }

  double arg = fc >= fd ? c : d;
  double val = fc >= fd ? fc : fd;
  // Endpoints win on equality so boundary optima are reported exactly.
  double f0 = checked(f(0.0), "maximize_concave_01");
  double f1 = checked(f(1.0), "maximize_concave_01");
  double best = std::max(val, std::max(f0, f1));
  if (f0 >= best) return {0.0, f0};
  if (f1 >= best) return {1.0, f1};
  return {arg, val};
}

double bisect_decreasing_root(const std::function<double(double)>& g, double lo,
                              double hi, int iterations) {
  double glo = checked(g(lo), "bisect_decreasing_root");
  double ghi = checked(g(hi), "bisect_decreasing_root");
  if (glo <= 0.0) return lo;
  if (ghi >= 0.0) return hi;
  for (int it = 0; it < iterations; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at fp resolution
    double gm = checked(g(mid), "bisect_decreasing_root");
    if (gm > 0.0)
      lo = mid;
    else if (gm < 0.0)
      hi = mid;
    else
      return mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Orthonormal Hermite recurrence (weight exp(-x^2)): returns p_n(x) and, via
// pnm1, p_{n-1}(x). p'_n = sqrt(2n) p_{n-1}, so both Newton steps and the
// quadrature weights come from the same evaluation.
double hermite_ortho(int n, double x, double& pnm1) {
  const double pim4 = 0.7511255444649425;  // pi^(-1/4)
  double p1 = pim4, p2 = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = x * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
  }
  pnm1 = p2;
  return p1;
}

// Number of eigenvalues of the Hermite Jacobi matrix (diag 0, offdiag
// sqrt(k/2)) strictly below x, by the Sturm sequence.
int sturm_count(int n, double x) {
  int count = 0;
  double d = -x;
  if (d < 0.0) ++count;
  for (int k = 1; k < n; ++k) {
    const double b2 = 0.5 * k;  // offdiag^2, exact
    double denom = d;
    if (std::abs(denom) < 1e-300) denom = denom < 0.0 ? -1e-300 : 1e-300;
    d = -x - b2 / denom;
    if (d < 0.0) ++count;
  }
  return count;
}

}  // namespace

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::domain_error("gauss_hermite: order must be >= 1");
  GaussHermiteRule rule;
  rule.nodes.assign(std::size_t(n), 0.0);
  rule.weights.assign(std::size_t(n), 0.0);

  // Nodes are the Jacobi-matrix eigenvalues: isolate each by bisection, then
  // polish with safeguarded Newton on the polynomial itself.
  const double radius = 2.0 * std::sqrt(0.5 * (n - 1)) + 1.0;
  const int m = n / 2;  // strictly positive roots
  for (int idx = 0; idx < m; ++idx) {
    const int rank = n - 1 - idx;  // eigenvalue rank in ascending order
    double lo = 0.0, hi = radius;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (sturm_count(n, mid) <= rank)
        lo = mid;
      else
        hi = mid;
    }
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 12; ++it) {
      double pnm1 = 0.0;
      const double pn = hermite_ortho(n, z, pnm1);
      const double dz = pn / (std::sqrt(2.0 * n) * pnm1);
      if (!std::isfinite(dz) || std::abs(dz) > hi - lo) break;
      z -= dz;
      if (std::abs(dz) <= 1e-16 * (1.0 + std::abs(z))) break;
    }
    double pnm1 = 0.0;
    hermite_ortho(n, z, pnm1);
    const double pp = std::sqrt(2.0 * n) * pnm1;
    const double w = 2.0 / pp / pp;  // sequential divide: pp^2 may overflow

    rule.nodes[std::size_t(idx)] = z;
    rule.nodes[std::size_t(n - 1 - idx)] = -z;
    rule.weights[std::size_t(idx)] = w;
    rule.weights[std::size_t(n - 1 - idx)] = w;
  }
  if (n % 2 == 1) {
    double pnm1 = 0.0;
    hermite_ortho(n, 0.0, pnm1);
    const double pp = std::sqrt(2.0 * n) * pnm1;
    rule.nodes[std::size_t(m)] = 0.0;
    rule.weights[std::size_t(m)] = 2.0 / pp / pp;
  }
  return rule;
}

const GaussHermiteRule& gauss_hermite_default() {
  static const GaussHermiteRule rule = gauss_hermite(200);
  return rule;
}

double lognormal_expectation(const std::function<double(double)>& g, double m,
                             double s) {
  if (!(s > 0.0)) throw std::domain_error("lognormal_expectation: s must be > 0");
  const auto& rule = gauss_hermite_default();
  const double sqrt2 = std::numbers::sqrt2;
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double y = std::exp(m + s * sqrt2 * rule.nodes[i]);
    double term = rule.weights[i] * g(y);
    if (!std::isfinite(term))
      throw std::domain_error("lognormal_expectation: non-finite integrand term");
    acc += term;
  }
  double out = acc / std::sqrt(std::numbers::pi);
  if (!std::isfinite(out))
    throw std::domain_error("lognormal_expectation: diverged");
  return out;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double t) {
  if (!(t > 0.0 && t < 1.0))
    throw std::domain_error("normal_quantile: t must lie in (0,1)");

  // Acklam's rational approximation, three regions.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;

  double x;
  if (t < plow) {
    double q = std::sqrt(-2.0 * std::log(t));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (t <= 1.0 - plow) {
    double q = t - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - t));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against the exact CDF.
  double e = normal_cdf(x) - t;
  double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  if (std::isfinite(u)) x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double normal_quantile_complement(double t) { return -normal_quantile(t); }

double lognormal_quantile(double t, double m, double s) {
  if (!(s > 0.0)) throw std::domain_error("lognormal_quantile: s must be > 0");
  return std::exp(m + s * normal_quantile(t));
}

double lognormal_quantile_complement(double t, double m, double s) {
  if (!(s > 0.0)) throw std::domain_error("lognormal_quantile: s must be > 0");
  return std::exp(m - s * normal_quantile(t));
}

namespace {

constexpr std::size_t kTransportCap = 50;

struct Cell {
  int i, j;
  double flow;
};

}  // namespace

double lp_transport(const std::vector<std::vector<double>>& cost,
                    std::span<const double> mu, std::span<const double> nu) {
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  if (m == 0 || n == 0) throw std::domain_error("lp_transport: empty marginal");
  if (m > kTransportCap || n > kTransportCap)
    throw CapExceeded("lp_transport dimensions", double(std::max(m, n)),
                      double(kTransportCap));
  if (cost.size() != m)
    throw std::domain_error("lp_transport: cost rows mismatch");
  for (const auto& row : cost)
    if (row.size() != n) throw std::domain_error("lp_transport: cost cols mismatch");

  double sum_mu = 0.0, sum_nu = 0.0;
  for (double v : mu) {
    if (!(v >= 0.0)) throw std::domain_error("lp_transport: negative mass");
    sum_mu += v;
  }
  for (double v : nu) {
    if (!(v >= 0.0)) throw std::domain_error("lp_transport: negative mass");
    sum_nu += v;
  }
  if (std::abs(sum_mu - sum_nu) > 1e-9 * (1.0 + std::abs(sum_mu)))
    throw std::domain_error("lp_transport: marginal totals differ");

  std::vector<double> a(mu.begin(), mu.end());
  std::vector<double> b(nu.begin(), nu.end());
  if (sum_nu > 0.0) {
    double scale = sum_mu / sum_nu;
    for (double& v : b) v *= scale;
  }
  if (sum_mu == 0.0) return 0.0;

  double cscale = 0.0;
  for (const auto& row : cost)
    for (double v : row) cscale = std::max(cscale, std::abs(v));
  const double tol = 1e-12 * (1.0 + cscale);

  // Northwest-corner initial basis (m + n - 1 cells, possibly degenerate).
  std::vector<Cell> basis;
  basis.reserve(m + n - 1);
  {
    std::size_t i = 0, j = 0;
    double ra = a[0], rb = b[0];
    while (true) {
      double f = std::min(ra, rb);
      basis.push_back({int(i), int(j), f});
      ra -= f;
      rb -= f;
      if (ra <= rb && i + 1 < m) {
        ++i;
        ra = a[i];
      } else if (j + 1 < n) {
        ++j;
        rb = b[j];
      } else if (i + 1 < m) {
        ++i;
        ra = a[i];
      } else {
        break;
      }
    }
  }

  std::vector<double> u(m), v(n);
  std::vector<char> useen(m), vseen(n);
  std::vector<std::vector<int>> row_cells(m), col_cells(n);

  const int max_iters = 200000;
  for (int iter = 0; iter < max_iters; ++iter) {
    for (auto& rc : row_cells) rc.clear();
    for (auto& cc : col_cells) cc.clear();
    for (int k = 0; k < int(basis.size()); ++k) {
      row_cells[basis[k].i].push_back(k);
      col_cells[basis[k].j].push_back(k);
    }

    // Duals from the basis tree (u_0 = 0).
    std::fill(useen.begin(), useen.end(), 0);
    std::fill(vseen.begin(), vseen.end(), 0);
    u[0] = 0.0;
    useen[0] = 1;
    std::vector<int> stack = {0};  // rows encoded as r, cols as m + c
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      if (node < int(m)) {
        for (int k : row_cells[node]) {
          int j = basis[k].j;
          if (!vseen[j]) {
            v[j] = cost[node][j] - u[node];
            vseen[j] = 1;
            stack.push_back(int(m) + j);
          }
        }
      } else {
        int j = node - int(m);
        for (int k : col_cells[j]) {
          int i = basis[k].i;
          if (!useen[i]) {
            u[i] = cost[i][j] - v[j];
            useen[i] = 1;
            stack.push_back(i);
          }
        }
      }
    }

    // Entering cell: Bland (first negative reduced cost in row-major order).
    int ei = -1, ej = -1;
    for (std::size_t i = 0; i < m && ei < 0; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (cost[i][j] - u[i] - v[j] < -tol) {
          ei = int(i);
          ej = int(j);
          break;
        }
      }
    if (ei < 0) break;  // optimal

    // Cycle: path from row ei to col ej within the basis tree.
    std::vector<int> parent_cell(m + n, -1);
    std::vector<int> parent_node(m + n, -1);
    std::vector<char> seen(m + n, 0);
    std::vector<int> q = {ei};
    seen[ei] = 1;
    while (!q.empty() && !seen[m + ej]) {
      int node = q.back();
      q.pop_back();
      const auto& cells = node < int(m) ? row_cells[node] : col_cells[node - int(m)];
      for (int k : cells) {
        int nxt = node < int(m) ? int(m) + basis[k].j : basis[k].i;
        if (!seen[nxt]) {
          seen[nxt] = 1;
          parent_cell[nxt] = k;
          parent_node[nxt] = node;
          q.push_back(nxt);
        }
      }
    }
    if (!seen[m + ej])
      throw std::runtime_error("lp_transport: basis not connected");

    // Walk back col ej -> row ei; odd path positions lose flow.
    std::vector<int> path;  // basis cell indices, starting adjacent to entering
    for (int node = int(m) + ej; node != ei; node = parent_node[node])
      path.push_back(parent_cell[node]);

    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < path.size(); p += 2)
      theta = std::min(theta, basis[path[p]].flow);
    int leave_pos = -1;  // smallest basis index among the minimum-flow cells
    for (std::size_t p = 0; p < path.size(); p += 2) {
      if (basis[path[p]].flow <= theta &&
          (leave_pos < 0 || path[p] < path[leave_pos]))
        leave_pos = int(p);
    }
    for (std::size_t p = 0; p < path.size(); ++p)
      basis[path[p]].flow += (p % 2 == 0) ? -theta : theta;
    basis[path[leave_pos]] = {ei, ej, theta};
  }

  double total = 0.0;
  for (const auto& c : basis) total += c.flow * cost[c.i][c.j];
  return total;
}

}  // namespace mdpsense::numerics
