#pragma once

// Small statistics kit for the harness: quadratic OLS with coefficient
// tests, Pearson R / RMSE, paired t, and Wilson intervals.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace immersion {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of an empty series");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator).
inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("sample_sd needs at least two values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Two-sided p-value of a t statistic.
inline double t_two_sided_p(double t, double df) {
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

struct QuadFit {
  std::array<double, 3> coef{};  // intercept, x, x^2
  std::array<double, 3> se{};
  std::array<double, 3> t{};
  std::array<double, 3> p{};
  double r_squared = 0.0;
  std::size_t n = 0;

  double at(double x) const { return coef[0] + coef[1] * x + coef[2] * x * x; }
};

/// OLS of y on (1, x, x^2).
inline QuadFit quad_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("quad_regression: x and y differ in length");
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 4) throw std::invalid_argument("quad_regression needs at least 4 points");
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    X(i, 0) = 1.0;
    X(i, 1) = xi;
    X(i, 2) = xi * xi;
    Y(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Matrix3d xtx = X.transpose() * X;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(xtx);
  if (!lu.isInvertible()) throw std::domain_error("quad_regression: singular design");
  const Eigen::Matrix3d inv = lu.inverse();
  const Eigen::Vector3d beta = inv * (X.transpose() * Y);
  const Eigen::VectorXd resid = Y - X * beta;
  const double rss = resid.squaredNorm();
  const double df = static_cast<double>(n - 3);
  const double sigma2 = rss / df;

  QuadFit f;
  f.n = static_cast<std::size_t>(n);
  const double ybar = Y.mean();
  const double tss = (Y.array() - ybar).square().sum();
  f.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  for (int k = 0; k < 3; ++k) {
    f.coef[k] = beta(k);
    f.se[k] = std::sqrt(std::max(0.0, sigma2 * inv(k, k)));
    if (f.se[k] > 0.0) {
      f.t[k] = f.coef[k] / f.se[k];
      f.p[k] = t_two_sided_p(f.t[k], df);
    } else {
      // Exact fit: the coefficient is either exactly zero or infinitely significant.
      f.t[k] = f.coef[k] == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), f.coef[k]);
      f.p[k] = f.coef[k] == 0.0 ? 1.0 : 0.0;
    }
  }
  return f;
}

/// Rounds 1..n as the regression x-axis.
inline std::vector<double> round_axis(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
  return x;
}

inline QuadFit quad_regression(std::span<const double> y) {
  const auto x = round_axis(y.size());
  return quad_regression(x, y);
}

/// Pearson correlation; empty when either series has zero variance.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: series differ in length");
  if (a.size() < 2) throw std::invalid_argument("pearson needs at least two points");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline double rmse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("rmse: series differ in length");
  if (a.empty()) throw std::invalid_argument("rmse of empty series");
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss / static_cast<double>(a.size()));
}

struct FitMetrics {
  std::optional<double> r;  // empty: undefined (zero variance)
  double rmse = 0.0;
};

inline FitMetrics fit_metrics(std::span<const double> model, std::span<const double> human) {
  return {pearson(model, human), rmse(model, human)};
}

struct PairedT {
  double t = 0.0;
  double df = 0.0;
  double mean_diff = 0.0;  // a - b
  double p_two_sided = 1.0;
  double p_greater = 0.5;  // H1: mean(a - b) > 0
  double p_less = 0.5;     // H1: mean(a - b) < 0
  bool degenerate = false;  // differences have zero variance
};

inline PairedT paired_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t: series differ in length");
  if (a.size() < 2) throw std::invalid_argument("paired_t needs at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double sd = sample_sd(d);
  PairedT r;
  r.df = static_cast<double>(d.size() - 1);
  r.mean_diff = mean(d);
  if (sd == 0.0) {
    // Constant differences: t is 0 when they vanish, otherwise unbounded.
    r.degenerate = true;
    if (r.mean_diff == 0.0) return r;
    r.t = r.mean_diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p_two_sided = 0.0;
    r.p_greater = r.mean_diff > 0.0 ? 0.0 : 1.0;
    r.p_less = 1.0 - r.p_greater;
    return r;
  }
  r.t = r.mean_diff / (sd / std::sqrt(static_cast<double>(d.size())));
  boost::math::students_t dist(r.df);
  r.p_two_sided = t_two_sided_p(r.t, r.df);
  r.p_greater = boost::math::cdf(boost::math::complement(dist, r.t));
  r.p_less = boost::math::cdf(dist, r.t);
  return r;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

/// Wilson score interval for k successes in n trials.
inline Interval wilson_interval(long k, long n, double confidence) {
  if (n <= 0 || k < 0 || k > n) throw std::invalid_argument("wilson_interval: need 0 <= k <= n, n > 0");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("wilson_interval: confidence in (0, 1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2.0);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace immersion
