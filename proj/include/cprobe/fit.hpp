#pragma once

// Small least-squares helpers used by the oracle comparisons.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace cprobe {

/// Slope of log|y| against log x.
inline double fit_power_exponent(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_power_exponent: need >= 2 paired samples");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Coefficients (c2, c4) of the least-squares fit y ~ c2 x^2 + c4 x^4.
struct EvenQuarticFit {
  double c2 = 0.0;
  double c4 = 0.0;
};

inline EvenQuarticFit fit_even_quartic(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_even_quartic: need >= 2 paired samples");
  }
  // Normal equations with columns scaled to unit size for conditioning.
  double s22 = 0, s24 = 0, s44 = 0, b2 = 0, b4 = 0;
  double xmax = 0;
  for (double v : x) xmax = std::max(xmax, std::abs(v));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = x[i] / xmax;
    const double f2 = u * u;
    const double f4 = f2 * f2;
    s22 += f2 * f2;
    s24 += f2 * f4;
    s44 += f4 * f4;
    b2 += f2 * y[i];
    b4 += f4 * y[i];
  }
  const double det = s22 * s44 - s24 * s24;
  const double c2 = (b2 * s44 - b4 * s24) / det;
  const double c4 = (s22 * b4 - s24 * b2) / det;
  return {c2 / (xmax * xmax), c4 / (xmax * xmax * xmax * xmax)};
}

}  // namespace cprobe
