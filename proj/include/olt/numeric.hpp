#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace olt {

// The open probability interval representable in double precision:
// [DBL_MIN, 1 - 2^-53]. Evaluations are saturated at these bounds instead
// of returning exact 0 or 1 for extreme arguments.
inline constexpr double kProbFloor = std::numeric_limits<double>::min();
inline constexpr double kProbCeil = 1.0 - std::numeric_limits<double>::epsilon() / 2;

/// Logistic distribution function, saturated to (0, 1).
inline double logistic_cdf(double x) noexcept {
  double p;
  if (x >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    p = e / (1.0 + e);
  }
  return std::clamp(p, kProbFloor, kProbCeil);
}

/// Inverse logistic function; expects p in (0, 1).
inline double logit(double p) noexcept {
  return std::log(p) - std::log1p(-p);
}

/// log(1 + exp(t)) without overflow.
inline double softplus(double t) noexcept {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

/// log F(x) for the logistic F; accurate far into the left tail.
inline double log_logistic(double x) noexcept { return -softplus(-x); }

/// log(sum(exp(xs))). -inf entries contribute nothing; an all -inf input
/// returns -inf.
inline double log_sum_exp(std::span<const double> xs) noexcept {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (std::isinf(m) && m < 0.0) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// Normalized exponential of log weights.
inline std::vector<double> softmax_from_log_weights(std::span<const double> lw) {
  const double lse = log_sum_exp(lw);
  std::vector<double> p(lw.size());
  for (std::size_t i = 0; i < lw.size(); ++i) p[i] = std::exp(lw[i] - lse);
  return p;
}

}  // namespace olt
