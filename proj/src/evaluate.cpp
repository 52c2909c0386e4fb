#include "tfa/evaluate.hpp"

#include "tfa/errors.hpp"

namespace tfa {

PredictiveAccumulator::PredictiveAccumulator(int n_locations, int n_categories)
    : mean_(Eigen::MatrixXd::Zero(n_locations, n_categories)),
      m2_(Eigen::MatrixXd::Zero(n_locations, n_categories)) {}

void PredictiveAccumulator::add(const Eigen::MatrixXd& replicate) {
  if (replicate.rows() != mean_.rows() || replicate.cols() != mean_.cols()) {
    throw ValidationError("predictive replicate has wrong shape");
  }
  ++count_;
  const Eigen::MatrixXd delta = replicate - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta.cwiseProduct(replicate - mean_);  // Welford
}

PredictiveSummary PredictiveAccumulator::finalize(const Eigen::MatrixXd& observed) const {
  if (count_ < 2) throw ValidationError("predictive variance needs >= 2 replications");
  if (observed.rows() != mean_.rows() || observed.cols() != mean_.cols()) {
    throw ValidationError("observed matrix has wrong shape");
  }
  PredictiveSummary out;
  out.replications = count_;
  out.mean = mean_;
  out.variance = m2_ / static_cast<double>(count_ - 1);
  const double m = static_cast<double>(mean_.rows());
  const Eigen::MatrixXd err = observed - mean_;
  out.ppl = out.variance.sum() / m + err.squaredNorm() / (m + 1.0);
  out.bias_per_category = err.colwise().sum().transpose() / m;
  out.variance_per_category = out.variance.colwise().sum().transpose() / m;
  return out;
}

void factor_predictive_stream(const PosteriorDraws& draws, const PartitionTree& tree,
                              const Eigen::VectorXd& totals, int reps_per_draw, Rng& rng,
                              const std::function<void(const Eigen::MatrixXd&)>& sink) {
  if (reps_per_draw < 1) throw ValidationError("reps_per_draw must be >= 1");
  const int n_cats = tree.n_leaves();
  for (const ModelState& state : draws.draws) {
    const int m = state.n_locations();
    if (m != totals.size()) throw ValidationError("totals do not match draw dimensions");
    const Eigen::MatrixXd psi = state.psi();
    Eigen::MatrixXd probs(m, n_cats);
    for (int i = 0; i < m; ++i) {
      probs.row(i) = invert(psi.row(i).transpose(), tree).transpose();
    }
    Eigen::MatrixXd replicate(m, n_cats);
    for (int rep = 0; rep < reps_per_draw; ++rep) {
      for (int i = 0; i < m; ++i) {
        replicate.row(i) =
            rng.multinomial_counts(static_cast<long long>(totals[i]),
                                   probs.row(i).transpose())
                .transpose();
      }
      sink(replicate);
    }
  }
}

PredictiveSummary ppl_factor(const PosteriorDraws& draws, const CountMatrix& observed,
                             const PartitionTree& tree, int reps_per_draw, Rng& rng) {
  observed.validate();
  if (draws.draws.empty()) throw ValidationError("ppl_factor: no posterior draws");
  PredictiveAccumulator acc(observed.n_locations(), observed.n_categories());
  factor_predictive_stream(draws, tree, observed.row_totals(), reps_per_draw, rng,
                           [&](const Eigen::MatrixXd& rep) { acc.add(rep); });
  return acc.finalize(observed.counts.cast<double>());
}

}  // namespace tfa
