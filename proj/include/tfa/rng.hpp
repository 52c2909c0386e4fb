#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace tfa {

// Seeded random stream. The engine is a mt19937_64 whose seed word is derived
// from a (seed, stream) pair via splitmix64:
//
//   engine_seed = splitmix64(splitmix64(seed) + stream)
//
// so any (seed, stream) pair maps to a documented, reproducible stream.
// Parallel consumers (chains, replicate workers) take distinct stream ids.
// All variate generators below are implemented in-repo so that a given
// binary + seed reproduces draws bit-identically.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Derived stream with the same seed; used for per-chain / per-task streams.
  Rng substream(std::uint64_t stream) const { return Rng(seed_, stream); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0,1).
  double uniform();
  // Standard normal via the Marsaglia polar method (stateless across calls).
  double normal();
  // Exponential with unit rate.
  double exponential();
  // Gamma(shape, rate), shape > 0 (Marsaglia-Tsang, with the shape<1 boost).
  double gamma(double shape, double rate);
  double beta(double a, double b);
  // N(mean, sd^2) truncated to [lo, hi]; handles far-tail intervals.
  double trunc_normal(double mean, double sd, double lo, double hi);
  // Binomial(n, p) by recursive beta splitting; exact for any n.
  long long binomial(long long n, double p);
  // Multinomial(n, p); p need not be normalized beyond sum ~ 1.
  Eigen::VectorXd multinomial_counts(long long n, const Eigen::VectorXd& p);
  Eigen::VectorXd dirichlet(const Eigen::VectorXd& alpha);

 private:
  double trunc_std_normal(double a, double b);  // standardized bounds, a < b

  std::mt19937_64 engine_;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace tfa
