#include "tfa/polya_gamma.hpp"

#include <cmath>
#include <limits>

#include "tfa/errors.hpp"
#include "tfa/mathutil.hpp"

namespace tfa {

double pg_mean(long long b, double c) {
  if (b < 0) throw ValidationError("pg_mean: b must be nonnegative");
  if (b == 0) return 0.0;
  const double t = 0.5 * std::abs(c);
  double ratio;  // tanh(t)/t with a stable small-t limit
  if (t < 1e-4) {
    const double t2 = t * t;
    ratio = 1.0 - t2 / 3.0 + 2.0 * t2 * t2 / 15.0;
  } else {
    ratio = std::tanh(t) / t;
  }
  return 0.25 * static_cast<double>(b) * ratio;
}

double pg_var(long long b, double c) {
  if (b < 0) throw ValidationError("pg_var: b must be nonnegative");
  if (b == 0) return 0.0;
  const double z = std::abs(c);
  double core;  // (sinh z - z)/z^3, stable near 0
  if (z < 1e-3) {
    const double z2 = z * z;
    core = 1.0 / 6.0 + z2 / 120.0 + z2 * z2 / 5040.0;
  } else {
    core = (std::sinh(z) - z) / (z * z * z);
  }
  const double sech = 1.0 / std::cosh(0.5 * z);
  return 0.25 * static_cast<double>(b) * core * sech * sech;
}

namespace {

constexpr double kTrunc = 0.64;  // proposal switch point for the Jacobi density

// Piecewise coefficients of the alternating series for the J*(1,.) density.
double a_coef(int n, double x) {
  const double np5 = n + 0.5;
  if (x > kTrunc) {
    return kPi * np5 * std::exp(-0.5 * np5 * np5 * kPi * kPi * x);
  }
  return std::pow(2.0 / (kPi * x), 1.5) * kPi * np5 * std::exp(-2.0 * np5 * np5 / x);
}

// Probability that the proposal draws from the exponential (right) branch.
double texpon_mass(double z) {
  const double t = kTrunc;
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
  const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
  const double x0 = std::log(fz) + fz * t;
  const double xb = x0 - z + log_normal_cdf(b);
  const double xa = x0 + z + log_normal_cdf(a);
  const double qdivp = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + qdivp);
}

// Inverse-Gaussian(1/z, 1) restricted to (0, kTrunc].
double rtigauss(double z, Rng& rng) {
  const double t = kTrunc;
  double x = t + 1.0;
  if (z < 1.0 / t) {  // mu > t: tilted truncated inverse-chi-square proposal
    double alpha = 0.0;
    while (rng.uniform() > alpha) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      alpha = std::exp(-0.5 * z * z * x);
    }
  } else {
    const double mu = 1.0 / z;
    while (x > t) {
      double y = rng.normal();
      y = y * y;
      const double muy = mu * y;
      x = mu + 0.5 * mu * muy - 0.5 * mu * std::sqrt(4.0 * muy + muy * muy);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

}  // namespace

double sample_pg1(double c, Rng& rng) {
  const double z = 0.5 * std::abs(c);
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double p_right = texpon_mass(z);
  while (true) {
    double x;
    if (rng.uniform() < p_right) {
      x = kTrunc + rng.exponential() / fz;
    } else {
      x = rtigauss(z, rng);
    }
    // Squeeze via the alternating series until it brackets the decision.
    double s = a_coef(0, x);
    const double y = rng.uniform() * s;
    int n = 0;
    while (true) {
      ++n;
      if (n % 2 == 1) {
        s -= a_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += a_coef(n, x);
        if (y > s) break;  // reject, redraw proposal
      }
    }
  }
}

double sample_pg(const PgParams& params, Rng& rng, long long exact_max_b) {
  if (params.b < 0) throw ValidationError("sample_pg: b must be nonnegative");
  if (!std::isfinite(params.c)) throw ValidationError("sample_pg: c must be finite");
  if (params.b == 0) return 0.0;
  if (params.b <= exact_max_b) {
    double sum = 0.0;
    for (long long i = 0; i < params.b; ++i) sum += sample_pg1(params.c, rng);
    return sum;
  }
  const double mean = pg_mean(params.b, params.c);
  const double sd = std::sqrt(pg_var(params.b, params.c));
  return rng.trunc_normal(mean, sd, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace tfa
