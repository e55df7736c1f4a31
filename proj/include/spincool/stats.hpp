#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "spincool/rng.hpp"

namespace spincool::stats {

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;  // standard error of the slope
};

// Ordinary least squares y = a + b x.  R^2 against the (weighted) mean.
inline LinFit linfit_weighted(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& w) {
  const std::size_t n = x.size();
  if (y.size() != n || w.size() != n)
    throw std::invalid_argument("linfit: mismatched lengths");
  if (n < 2) throw std::invalid_argument("linfit: need at least two points");

  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(w[i] > 0)) throw std::invalid_argument("linfit: weights must be > 0");
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - xbar, dy = y[i] - ybar;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * dy;
    syy += w[i] * dy * dy;
  }
  if (sxx == 0) throw std::invalid_argument("linfit: degenerate abscissa");

  LinFit f;
  f.slope = sxy / sxx;
  f.intercept = ybar - f.slope * xbar;
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += w[i] * r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ssr / syy : 1.0;
  // With weights w_i = 1/sigma_i^2 the slope variance is 1/sxx; for unit
  // weights fall back to the residual-variance estimate.
  bool unit = true;
  for (double wi : w)
    if (wi != 1.0) unit = false;
  f.slope_se = unit ? std::sqrt(n > 2 ? ssr / double(n - 2) / sxx : 0.0)
                    : std::sqrt(1.0 / sxx);
  return f;
}

inline LinFit linfit(const std::vector<double>& x,
                     const std::vector<double>& y) {
  return linfit_weighted(x, y, std::vector<double>(x.size(), 1.0));
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean of empty sample");
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

// Sample standard deviation (n - 1 denominator).
inline double stddev(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("stddev needs two points");
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

inline double standard_error(const std::vector<double>& v) {
  return stddev(v) / std::sqrt(double(v.size()));
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
  return 0.5 * (v[mid - 1] + hi);
}

inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("percentile of empty sample");
  std::sort(v.begin(), v.end());
  const double idx = p * double(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = idx - double(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

struct Interval {
  double lo = 0.0, hi = 0.0;
};

// Percentile bootstrap confidence interval for the mean.
inline Interval bootstrap_mean_ci(const std::vector<double>& v,
                                  double confidence, int n_resample,
                                  std::uint64_t seed) {
  if (v.empty()) throw std::invalid_argument("bootstrap of empty sample");
  if (!(confidence > 0 && confidence < 1))
    throw std::invalid_argument("confidence must be in (0, 1)");
  RngStream rng(seed);
  std::vector<double> means(n_resample);
  for (int b = 0; b < n_resample; ++b) {
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto j =
          static_cast<std::size_t>(rng.uniform() * double(v.size()));
      s += v[std::min(j, v.size() - 1)];
    }
    means[b] = s / double(v.size());
  }
  const double tail = 0.5 * (1.0 - confidence);
  return {percentile(means, tail), percentile(means, 1.0 - tail)};
}

}  // namespace spincool::stats
