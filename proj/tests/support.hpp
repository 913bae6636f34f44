#pragma once

// Statistics helpers for the Monte Carlo tests. Kept independent of the
// library so they can serve as oracles.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "mvpf/model.hpp"

namespace testing {

inline double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Unbiased sample variance.
inline double variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double correlation(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Ordinary least-squares slope.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// Pearson statistic of observed counts against probabilities. Cells with zero
// probability must have zero counts; they are dropped along with their degree
// of freedom. Returns {statistic, degrees of freedom}.
struct ChiSquare {
  double stat = 0.0;
  int dof = 0;
  bool impossible_cell_hit = false;

  double critical(double alpha) const {
    if (dof <= 0) return 0.0;
    return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), alpha));
  }
  bool passes(double alpha) const { return !impossible_cell_hit && stat <= critical(alpha); }
};

inline ChiSquare chi_square(std::span<const std::size_t> counts, std::span<const double> probs) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  ChiSquare out;
  int cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] <= 0.0) {
      if (counts[i] != 0) out.impossible_cell_hit = true;
      continue;
    }
    const double e = total * probs[i];
    const double d = static_cast<double>(counts[i]) - e;
    out.stat += d * d / e;
    ++cells;
  }
  out.dof = cells - 1;
  return out;
}

// Two-sample Kolmogorov-Smirnov statistic D.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Asymptotic two-sample KS critical value at level 0.001: c(alpha) sqrt((n+m)/(nm)),
// c = sqrt(-ln(alpha/2)/2).
inline double ks_critical_0001(std::size_t n, std::size_t m) {
  const double c = std::sqrt(-0.5 * std::log(0.0005));
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

// a = const drift, b = const diffusion, no interaction, dimension 1.
inline mvpf::ModelSpec constant_coefficients(double drift, double diffusion, double x0) {
  mvpf::ModelSpec m;
  m.name = "constant";
  m.dim = 1;
  m.x0 = {x0};
  m.drift = [drift](std::span<const double>, double, std::span<double> out) { out[0] = drift; };
  m.diffusion = [diffusion](std::span<const double>, double, std::span<double> out) {
    out[0] = diffusion;
  };
  m.kernel1 = mvpf::Kernel::zero();
  m.kernel2 = mvpf::Kernel::zero();
  return m;
}

inline double identity(std::span<const double> x) { return x[0]; }

}  // namespace testing
