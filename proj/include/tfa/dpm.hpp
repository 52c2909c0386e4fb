#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfa/embedding.hpp"
#include "tfa/evaluate.hpp"
#include "tfa/rng.hpp"

namespace tfa {

struct DpmOptions {
  double eta = 1.0;         // symmetric Dirichlet base measure
  double a = 2.0;           // Gamma prior shape on alpha
  double b = 1.0;           // Gamma prior rate on alpha
  double alpha_init = 1.0;
  bool sample_alpha = true; // fixed-alpha mode used by enumeration tests

  void validate() const;
};

// Mutable sampler state for the collapsed Gibbs scan. Cluster ids are dense
// 0..k-1; statistics track the summed count rows and member counts.
struct DpmState {
  std::vector<int> assignment;                 // per location
  std::vector<Eigen::VectorXd> cluster_counts; // per cluster, J-vector
  std::vector<int> cluster_sizes;
  double alpha = 1.0;

  int n_clusters() const { return static_cast<int>(cluster_counts.size()); }
  void check_consistency(const Eigen::MatrixXd& counts) const;
};

DpmState init_dpm_state(const Eigen::MatrixXd& counts, const DpmOptions& options);

// Collapsed scan (conjugate Dirichlet-multinomial predictive); every location
// is reassigned given all others, new clusters open with weight alpha.
void update_assignments(DpmState& state, const Eigen::MatrixXd& counts, double eta,
                        Rng& rng);

// Escobar-West auxiliary-variable update of the concentration parameter.
void update_alpha(DpmState& state, int n_locations, double a, double b, Rng& rng);

// log DirMult(y | base), dropping the multinomial coefficient (constant in
// the cluster comparison).
double dirichlet_multinomial_logpred(const Eigen::VectorXd& y, const Eigen::VectorXd& base);

struct DpmDraws {
  std::uint64_t seed = 0;
  int iterations = 0;
  int burn_in = 0;
  int thinning = 1;
  DpmOptions options;
  std::vector<std::vector<int>> assignments;  // per retained draw
  std::vector<double> alphas;

  int size() const { return static_cast<int>(assignments.size()); }
};

struct DpmChainConfig {
  int iterations = 5000;
  int burn_in = 2500;
  int thinning = 5;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
};

DpmDraws run_dpm_chain(const CountMatrix& counts, const DpmOptions& options,
                       const DpmChainConfig& config);

struct ClusterCountSummary {
  double mean = 0.0;
  double lower = 0.0;   // 2.5% quantile
  double upper = 0.0;   // 97.5% quantile
};

ClusterCountSummary cluster_count_summary(const DpmDraws& draws);

// Per draw: rebuild cluster statistics, draw one Dirichlet probability vector
// per cluster, then a multinomial replicate per location; feeds the same
// accumulator as the factor model.
void dpm_predictive_stream(const DpmDraws& draws, const CountMatrix& observed,
                           int reps_per_draw, Rng& rng,
                           const std::function<void(const Eigen::MatrixXd&)>& sink);

PredictiveSummary ppl_dpm(const DpmDraws& draws, const CountMatrix& observed,
                          int reps_per_draw, Rng& rng);

}  // namespace tfa
