#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfa/embedding.hpp"
#include "tfa/rng.hpp"
#include "tfa/tree.hpp"

namespace tfa {

enum class MuMode { kFixed, kEstimated };

struct Hyperparameters {
  int K = 10;          // factor truncation level
  double a1 = 2.1;     // gamma shape for delta_1
  double a2 = 3.1;     // gamma shape for delta_l, l >= 2
  double nu = 3.0;     // local shrinkage degrees of freedom
  double m_rho = 0.0;  // truncated-normal prior for rho_k on (-1,1)
  double s2_rho = 1.0;
  MuMode mu_mode = MuMode::kFixed;
  double m_mu = 0.0;  // normal prior per mu(A), estimated mode only
  double s2_mu = 1.0;

  void validate() const;
};

// Row-normalized spatial weights. Rows sum to 1 or are entirely zero
// (isolated locations); the sparsity pattern must be symmetric.
struct SpatialWeights {
  Eigen::MatrixXd W;

  int size() const { return static_cast<int>(W.rows()); }
  void validate() const;
  static SpatialWeights none(int m) { return SpatialWeights{Eigen::MatrixXd::Zero(m, m)}; }
  // Row-normalizes a nonnegative weight matrix with zero diagonal.
  static SpatialWeights from_raw(Eigen::MatrixXd raw);
};

// One Gibbs configuration. Eta columns and Mu/Omega columns follow the
// canonical internal-node order of the tree.
struct ModelState {
  Eigen::MatrixXd Lambda;  // M x K loadings
  Eigen::MatrixXd Eta;     // K x N factors per node
  Eigen::VectorXd Mu;      // N node means
  Eigen::MatrixXd Phi;     // M x K local shrinkage, > 0
  Eigen::VectorXd Delta;   // K multiplicative gamma increments, > 0
  Eigen::VectorXd Rho;     // K SAR coefficients in (-1, 1)
  Eigen::MatrixXd Omega;   // M x N Polya-Gamma latents, >= 0

  int n_locations() const { return static_cast<int>(Lambda.rows()); }
  int n_factors() const { return static_cast<int>(Lambda.cols()); }
  int n_nodes() const { return static_cast<int>(Eta.cols()); }

  // tau_k = prod_{l<=k} delta_l
  Eigen::VectorXd tau() const;
  // psi_i(A) = mu(A) + Lambda_i. eta(A); M x N
  Eigen::MatrixXd psi() const;
  void validate_invariants(const NodeCounts* counts = nullptr) const;
};

struct ChainMetadata {
  std::uint64_t seed = 0;
  int iterations = 0;
  int burn_in = 0;
  int thinning = 1;
  bool store_omega = false;
  std::string tree_hash;
  std::string data_hash;
};

struct PosteriorDraws {
  ChainMetadata meta;
  std::vector<ModelState> draws;  // Omega left empty unless store_omega

  int size() const { return static_cast<int>(draws.size()); }
};

// mu(A) = log(|A_l|/|A_r|); inverting this mean alone gives the uniform
// distribution over the categories.
Eigen::VectorXd default_mu(const PartitionTree& tree);

// tau_k (I - rho_k W^T) Phi_k (I - rho_k W), the SAR prior precision of
// loading column k.
Eigen::MatrixXd lambda_prior_precision(int k, const ModelState& state,
                                       const SpatialWeights& weights);

// Prior draw of all parameters; Omega gets the deterministic warm start
// omega_i(A) = pg_mean(n_i(A), psi_i(A)).
ModelState init_state(const Hyperparameters& hyper, const PartitionTree& tree,
                      const SpatialWeights& weights, const NodeCounts& counts, Rng& rng);

// Prior draw without data (used by simulators); Omega is set to zero.
ModelState draw_prior_state(const Hyperparameters& hyper, int m, int n_nodes,
                            const SpatialWeights& weights, const PartitionTree& tree, Rng& rng);

}  // namespace tfa
