#pragma once

#include <cstdint>

#include "tfa/rng.hpp"

namespace tfa {

struct PgParams {
  long long b = 0;  // integer shape, >= 0
  double c = 0.0;   // tilt
};

// E[PG(b,c)] = b/(2c) tanh(c/2), with the c->0 limit b/4.
double pg_mean(long long b, double c);

// Var[PG(b,c)] = b (sinh c - c) sech^2(c/2) / (4 c^3), limit b/24 at c = 0.
double pg_var(long long b, double c);

// One PG(1, c) draw by the alternating-series rejection sampler.
double sample_pg1(double c, Rng& rng);

// PG(b, c) draw. b = 0 is the point mass at 0; 1 <= b <= exact_max_b sums
// exact PG(1, c) draws; larger b uses a moment-matched normal truncated to
// (0, inf). The crossover is a config knob (gibbs uses ChainConfig).
double sample_pg(const PgParams& params, Rng& rng, long long exact_max_b = 30);

}  // namespace tfa
