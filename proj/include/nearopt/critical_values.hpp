#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace nearopt {

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Upper two-sided Student-t critical value: P(|T_df| > c) = alpha.
inline double student_t_critical(double alpha, int df) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("student_t_critical: alpha outside (0,1)");
  }
  if (df < 1) throw std::invalid_argument("student_t_critical: df must be >= 1");
  const boost::math::students_t_distribution<double> dist(static_cast<double>(df));
  return boost::math::quantile(dist, 1.0 - alpha / 2.0);
}

namespace detail {

struct QuadratureRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

// Gauss-Legendre nodes via Newton iteration on the Legendre recurrence.
inline QuadratureRule gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
      }
      derivative = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / derivative;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * derivative * derivative);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

inline const QuadratureRule& gauss_legendre_24() {
  static const QuadratureRule rule = gauss_legendre(24);
  return rule;
}

// Composite Gauss-Legendre integral of fn over [a, b].
template <class Fn>
double integrate_panels(Fn&& fn, double a, double b, int panels) {
  const QuadratureRule& rule = gauss_legendre_24();
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width;
    const double half = 0.5 * width;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      acc += rule.weights[i] * fn(mid + half * rule.nodes[i]);
    }
    total += acc * half;
  }
  return total;
}

// Finds the root of a monotone increasing fn on [lo, hi] (Illinois method).
inline double bracketed_root(const std::function<double(double)>& fn, double lo, double hi,
                             double xtol) {
  double flo = fn(lo);
  double fhi = fn(hi);
  if (std::abs(flo) < 1e-13) return lo;
  if (std::abs(fhi) < 1e-13) return hi;
  for (int expand = 0; flo > 0.0 && expand < 8; ++expand) {
    lo = std::max(1e-8, lo * 0.5);
    flo = fn(lo);
  }
  for (int expand = 0; fhi < 0.0 && expand < 8; ++expand) {
    hi *= 1.5;
    fhi = fn(hi);
  }
  if (flo > 0.0 || fhi < 0.0) throw std::runtime_error("bracketed_root: failed to bracket");
  double side = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = (hi * flo - lo * fhi) / (flo - fhi);
    const double fmid = fn(mid);
    if (std::abs(hi - lo) < xtol || fmid == 0.0) return mid;
    if (fmid < 0.0) {
      lo = mid;
      flo = fmid;
      if (side == -1.0) fhi *= 0.5;
      side = -1.0;
    } else {
      hi = mid;
      fhi = fmid;
      if (side == 1.0) flo *= 0.5;
      side = 1.0;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// P(max_{t=1..k} |T_t| <= c) where (T_1, ..., T_k) is equicorrelated
// multivariate t: T_t = (sqrt(rho) Z0 + sqrt(1-rho) X_t) / W with Z0, X_t iid
// standard normal and df * W^2 ~ chi-squared(df). Two nested quadratures: the
// shared control variate Z0 and the shared scale variate W.
inline double equicorrelated_max_abs_t_cdf(double c, int k, double rho, int df) {
  if (k < 1) throw std::invalid_argument("equicorrelated_max_abs_t_cdf: k must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("equicorrelated_max_abs_t_cdf: rho outside [0,1)");
  }
  if (df < 1) throw std::invalid_argument("equicorrelated_max_abs_t_cdf: df must be >= 1");
  if (c <= 0.0) return 0.0;

  const double sqrt_rho = std::sqrt(rho);
  const double inv_s = 1.0 / std::sqrt(1.0 - rho);
  const double zmax = 8.6;  // phi beyond is < 3e-17

  const auto inner = [&](double u) {
    if (rho == 0.0) {
      const double p = standard_normal_cdf(u) - standard_normal_cdf(-u);
      return std::pow(p, k);
    }
    const auto f = [&](double z) {
      const double hi = standard_normal_cdf((u - sqrt_rho * z) * inv_s);
      const double lo = standard_normal_cdf((-u - sqrt_rho * z) * inv_s);
      const double p = hi - lo;
      return std::exp(-0.5 * z * z) * (k == 1 ? p : std::pow(p, k));
    };
    return detail::integrate_panels(f, -zmax, zmax, 20) / std::sqrt(2.0 * M_PI);
  };

  // Scale variate density: W = sqrt(Q / df) with Q ~ chi-squared(df).
  const double nu = static_cast<double>(df);
  const boost::math::chi_squared_distribution<double> chi2(nu);
  const double w_lo = std::sqrt(boost::math::quantile(chi2, 1e-16) / nu);
  const double w_hi = std::sqrt(boost::math::quantile(boost::math::complement(chi2, 1e-16)) / nu);
  const double log_norm = std::log(2.0) + 0.5 * nu * std::log(0.5 * nu) - std::lgamma(0.5 * nu);
  const auto outer = [&](double w) {
    const double log_density = log_norm + (nu - 1.0) * std::log(w) - 0.5 * nu * w * w;
    return std::exp(log_density) * inner(c * w);
  };
  return detail::integrate_panels(outer, w_lo, w_hi, 24);
}

// Two-sided critical value of Dunnett's many-to-one comparison test:
// P(max_t |T_t| <= c) = 1 - alpha under the equicorrelated multivariate-t
// null. Only the equal-correlation case is supported; comparison arms of
// unequal size are rejected rather than approximated.
inline double dunnett_critical(double alpha, int k, const std::vector<double>& correlations,
                               int df) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("dunnett_critical: alpha outside (0,1)");
  }
  if (k < 1) throw std::invalid_argument("dunnett_critical: k must be >= 1");
  if (static_cast<int>(correlations.size()) != k) {
    throw std::invalid_argument("dunnett_critical: need one correlation per comparison");
  }
  const double rho = correlations.front();
  for (double r : correlations) {
    if (std::abs(r - rho) > 1e-12) {
      throw std::invalid_argument(
          "dunnett_critical: unequal comparison-arm correlations are not supported; "
          "use equal sample sizes for all non-control arms");
    }
  }
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("dunnett_critical: correlation outside [0,1)");
  }
  const double target = 1.0 - alpha;
  const double lo = student_t_critical(alpha, df) * 0.999;
  const double hi = student_t_critical(alpha / k, df) + 0.01;
  const auto gap = [&](double c) { return equicorrelated_max_abs_t_cdf(c, k, rho, df) - target; };
  return detail::bracketed_root(gap, lo, hi, 1e-9);
}

}  // namespace nearopt
