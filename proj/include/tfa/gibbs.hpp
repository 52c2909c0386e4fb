#pragma once

#include <cstdint>

#include "tfa/embedding.hpp"
#include "tfa/model.hpp"
#include "tfa/rng.hpp"
#include "tfa/tree.hpp"

namespace tfa {

struct ChainConfig {
  int iterations = 5000;
  int burn_in = 2500;
  int thinning = 5;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;  // rng substream; parallel chains take 0,1,2,...
  bool store_omega = false;
  double jitter = 1e-10;          // relative ridge for precision factorizations
  long long pg_exact_max_b = 30;  // crossover to the normal PG approximation
  // The plain rho conditional drops the SAR normalizer |det(I - rho W)|,
  // which leaves the chain slightly off the exact joint posterior. With
  // rho_exact the update becomes an independence-MH step with the missing
  // determinant in the acceptance ratio.
  bool rho_exact = false;

  int retained() const { return (iterations - burn_in) / thinning; }
  void validate() const;
};

// Full conditionals (one sweep step each). All draws come from the passed rng;
// every update mutates only its own block of the state.
void update_omega(ModelState& state, const NodeCounts& counts, long long pg_exact_max_b,
                  Rng& rng);
void update_lambda_column(int k, ModelState& state, const NodeCounts& counts,
                          const SpatialWeights& weights, double jitter, Rng& rng);
void update_eta(int node, ModelState& state, const NodeCounts& counts, double jitter,
                Rng& rng);
void update_phi(ModelState& state, const SpatialWeights& weights,
                const Hyperparameters& hyper, Rng& rng);
void update_delta(ModelState& state, const SpatialWeights& weights,
                  const Hyperparameters& hyper, Rng& rng);
void update_rho(int k, ModelState& state, const SpatialWeights& weights,
                const Hyperparameters& hyper, Rng& rng);
// Determinant-corrected variant: proposes from the plain conditional and
// accepts with ratio |det(I - rho' W)| / |det(I - rho W)|, evaluated through
// the precomputed eigenvalues of W.
void update_rho_exact(int k, ModelState& state, const SpatialWeights& weights,
                      const Eigen::VectorXcd& w_eigenvalues, const Hyperparameters& hyper,
                      Rng& rng);
void update_mu(ModelState& state, const NodeCounts& counts, const Hyperparameters& hyper,
               Rng& rng);

Eigen::VectorXcd spatial_eigenvalues(const SpatialWeights& weights);

// One full sweep in the fixed order omega -> Lambda columns -> eta per node
// -> Phi -> delta -> rho -> mu (estimated mode only). w_eigenvalues is only
// consulted when config.rho_exact is set; pass nullptr to compute on the fly.
void gibbs_sweep(ModelState& state, const NodeCounts& counts, const SpatialWeights& weights,
                 const Hyperparameters& hyper, const ChainConfig& config, Rng& rng,
                 const Eigen::VectorXcd* w_eigenvalues = nullptr);

PosteriorDraws run_chain(const CountMatrix& counts, const PartitionTree& tree,
                         const SpatialWeights& weights, const Hyperparameters& hyper,
                         const ChainConfig& config);

}  // namespace tfa
