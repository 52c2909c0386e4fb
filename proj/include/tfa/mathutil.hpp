#pragma once

#include <cmath>

namespace tfa {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Numerically stable logistic function; safe for |x| well beyond 700.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// sigmoid(x) and sigmoid(-x) computed from a shared denominator so the pair
// sums to 1 up to one rounding.
inline void sigmoid_pair(double x, double* p_pos, double* p_neg) {
  const double t = std::exp(-std::abs(x));
  const double denom = 1.0 + t;
  const double big = 1.0 / denom;
  const double small = t / denom;
  if (x >= 0.0) {
    *p_pos = big;
    *p_neg = small;
  } else {
    *p_pos = small;
    *p_neg = big;
  }
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// log Phi(x); asymptotic expansion once erfc underflows.
inline double log_normal_cdf(double x) {
  if (x > -10.0) {
    return std::log(normal_cdf(x));
  }
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * kPi) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

}  // namespace tfa
