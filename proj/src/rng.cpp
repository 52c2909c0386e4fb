#include "tfa/rng.hpp"

#include <cmath>
#include <limits>

#include "tfa/errors.hpp"
#include "tfa/mathutil.hpp"

namespace tfa {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  engine_.seed(splitmix64(splitmix64(seed) + stream));
}

double Rng::uniform() {
  // 53-bit mantissa, offset by half an ulp so the result is strictly in (0,1).
  const std::uint64_t x = engine_() >> 11;
  return (static_cast<double>(x) + 0.5) * (1.0 / 9007199254740992.0);
}

double Rng::normal() {
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw ValidationError("gamma: shape and rate must be positive");
  }
  if (shape < 1.0) {
    // Boost a Gamma(shape+1) draw down: X * U^(1/shape).
    const double g = gamma(shape + 1.0, 1.0);
    return g * std::pow(uniform(), 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

double Rng::trunc_std_normal(double a, double b) {
  // Three regimes: interval straddles 0 (plain or uniform rejection),
  // or lies in one tail (Robert's shifted-exponential proposal).
  if (a > b) throw ValidationError("trunc_normal: empty interval");
  if (b < 0.0) return -trunc_std_normal(-b, -a);
  if (a <= 0.0) {
    if (b - a > 0.5) {
      while (true) {
        const double x = normal();
        if (x >= a && x <= b) return x;
      }
    }
    while (true) {  // narrow interval containing 0: uniform proposal
      const double x = a + (b - a) * uniform();
      if (uniform() <= std::exp(-0.5 * x * x)) return x;
    }
  }
  // a > 0
  if (b - a < 1.0 / a) {  // short tail interval: uniform proposal, tilted at a
    while (true) {
      const double x = a + (b - a) * uniform();
      if (uniform() <= std::exp(0.5 * (a * a - x * x))) return x;
    }
  }
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  while (true) {
    const double x = a + exponential() / lambda;
    if (x > b) continue;
    const double diff = x - lambda;
    if (uniform() <= std::exp(-0.5 * diff * diff)) return x;
  }
}

double Rng::trunc_normal(double mean, double sd, double lo, double hi) {
  if (!(sd > 0.0)) throw ValidationError("trunc_normal: sd must be positive");
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  double x = trunc_std_normal(a, b);
  // fp roundoff can land exactly on a bound; nudge inward
  x = std::min(std::max(x, a), b);
  return mean + sd * x;
}

long long Rng::binomial(long long n, double p) {
  if (n < 0) throw ValidationError("binomial: n must be nonnegative");
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (n <= 64) {
    long long c = 0;
    for (long long i = 0; i < n; ++i) c += (uniform() < p) ? 1 : 0;
    return c;
  }
  // Beta splitting: X_(a) ~ Beta(a, n+1-a) is the a-th uniform order statistic;
  // condition on it and recurse on the half containing p.
  const long long a = 1 + n / 2;
  const double x = beta(static_cast<double>(a), static_cast<double>(n - a + 1));
  if (x >= p) {
    return binomial(a - 1, std::min(1.0, p / x));
  }
  return a + binomial(n - a, std::min(1.0, (p - x) / (1.0 - x)));
}

Eigen::VectorXd Rng::multinomial_counts(long long n, const Eigen::VectorXd& p) {
  const Eigen::Index j = p.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(j);
  long long remaining = n;
  double mass_left = p.sum();
  for (Eigen::Index c = 0; c + 1 < j && remaining > 0; ++c) {
    const double q = (mass_left > 0.0) ? std::min(1.0, p[c] / mass_left) : 0.0;
    const long long y = binomial(remaining, q);
    out[c] = static_cast<double>(y);
    remaining -= y;
    mass_left -= p[c];
  }
  out[j - 1] = static_cast<double>(remaining);
  return out;
}

Eigen::VectorXd Rng::dirichlet(const Eigen::VectorXd& alpha) {
  Eigen::VectorXd g(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) g[i] = gamma(alpha[i], 1.0);
  const double s = g.sum();
  if (s <= 0.0) throw NumericalError("dirichlet: degenerate draw");
  return g / s;
}

}  // namespace tfa
