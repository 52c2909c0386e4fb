#pragma once

#include <functional>

#include <Eigen/Dense>

#include "tfa/embedding.hpp"
#include "tfa/model.hpp"
#include "tfa/rng.hpp"
#include "tfa/tree.hpp"

namespace tfa {

struct PredictiveSummary {
  Eigen::MatrixXd mean;      // E_ij over the predictive stream
  Eigen::MatrixXd variance;  // V_ij (sample variance)
  Eigen::VectorXd bias_per_category;      // (1/M) sum_i (y_ij - E_ij)
  Eigen::VectorXd variance_per_category;  // (1/M) sum_i V_ij
  double ppl = 0.0;
  long long replications = 0;
};

// Streaming per-cell moment accumulator shared by every model's predictive;
// the PPL comparison stays like-for-like because both models feed this.
class PredictiveAccumulator {
 public:
  PredictiveAccumulator(int n_locations, int n_categories);
  void add(const Eigen::MatrixXd& replicate);
  long long count() const { return count_; }
  // PPL = (1/M) sum_ij V_ij + (1/(M+1)) sum_ij (y_ij - E_ij)^2
  PredictiveSummary finalize(const Eigen::MatrixXd& observed) const;

 private:
  long long count_ = 0;
  Eigen::MatrixXd mean_;
  Eigen::MatrixXd m2_;
};

// Per retained draw: psi_i -> p_i = invert(psi_i), then a Multinomial(n_i, p_i)
// replicate per location, `reps_per_draw` times; each replicate is handed to
// the sink.
void factor_predictive_stream(const PosteriorDraws& draws, const PartitionTree& tree,
                              const Eigen::VectorXd& totals, int reps_per_draw, Rng& rng,
                              const std::function<void(const Eigen::MatrixXd&)>& sink);

PredictiveSummary ppl_factor(const PosteriorDraws& draws, const CountMatrix& observed,
                             const PartitionTree& tree, int reps_per_draw, Rng& rng);

}  // namespace tfa
