#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "tfa/model.hpp"
#include "tfa/tree.hpp"

namespace tfa {

struct EigenSummary {
  Eigen::MatrixXd per_draw;          // R x K, descending eigenvalues of Lambda Lambda^T
  Eigen::VectorXd mean_eigenvalues;  // K
  Eigen::VectorXd cumulative;        // K, proportions of the mean spectrum
  bool degenerate = false;           // all-zero spectrum
};

EigenSummary eigen_summary(const std::vector<Eigen::MatrixXd>& lambdas);
EigenSummary eigen_summary(const PosteriorDraws& draws);

// Smallest k whose cumulative mean-eigenvalue proportion reaches the threshold.
int select_k_star(const EigenSummary& summary, double threshold);

struct AlignOptions {
  int max_iters = 1000;
  double tol = 1e-8;       // relative change of the reference matrix
  int init_draw = -1;      // reference init: draw index, -1 = last draw
  bool check_sensitivity = true;  // rerun from 3 other starts, compare losses
  double sensitivity_tol = 1e-4;
};

struct AlignedDraws {
  int k_star = 0;
  Eigen::MatrixXd reference;              // M x K*
  std::vector<Eigen::MatrixXd> loadings;  // per draw, M x K* (Lambda Q)
  std::vector<Eigen::MatrixXd> factors;   // per draw, K* x N (Q^T Eta)
  std::vector<double> loss_trace;
  bool converged = true;
  bool sensitivity_warning = false;
};

// Iterative orthogonal alignment: alternate per-draw Procrustes solves
// Q = U V^T (from the SVD of Lambda^T reference) with reference := mean of
// the rotated draws, until the reference stabilizes.
AlignedDraws orthogonal_align(const std::vector<Eigen::MatrixXd>& lambdas,
                              const std::vector<Eigen::MatrixXd>& etas, int k_star,
                              const AlignOptions& options = {});
AlignedDraws orthogonal_align(const PosteriorDraws& draws, int k_star,
                              const AlignOptions& options = {});

struct TypicalDistributions {
  double c = 0.0;  // 2 x sd of the posterior-mean loadings for this factor
  // Per category: pointwise median and central 90% band over draws.
  Eigen::VectorXd plus_median, plus_lower, plus_upper;
  Eigen::VectorXd minus_median, minus_lower, minus_upper;
};

// Posterior of invert(mu +- c_k eta_k) for aligned factor k (0-based).
TypicalDistributions typical_distributions(const std::vector<Eigen::VectorXd>& mus,
                                           const AlignedDraws& aligned, int k,
                                           const PartitionTree& tree);

// Linear-interpolation quantile of a copy of the data (q in [0,1]).
double quantile(std::vector<double> values, double q);

}  // namespace tfa
