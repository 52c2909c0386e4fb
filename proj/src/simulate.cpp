#include "tfa/simulate.hpp"

#include <cmath>

#include "tfa/errors.hpp"

namespace tfa {

Eigen::Vector3d illustration_d1() { return Eigen::Vector3d(1.0 / 3, 1.0 / 3, 1.0 / 3); }
Eigen::Vector3d illustration_d2() { return Eigen::Vector3d(0.5, 1.0 / 3, 1.0 / 6); }

PartitionTree illustration_tree(CategorySpace* space_out) {
  const CategorySpace space{{"c1", "c2", "c3"}};
  if (space_out != nullptr) *space_out = space;
  return parse_tree("(c1 (c2 c3))", space);
}

std::vector<Eigen::VectorXd> simulate_mixture_illustration(int n, Rng& rng) {
  if (n < 1) throw ValidationError("simulate: n must be >= 1");
  const Eigen::Vector3d d1 = illustration_d1();
  const Eigen::Vector3d d2 = illustration_d2();
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double w = rng.beta(0.25, 0.35);
    out.emplace_back(w * d1 + (1.0 - w) * d2);
  }
  return out;
}

std::vector<Eigen::VectorXd> simulate_factor_illustration(int n, Rng& rng) {
  if (n < 1) throw ValidationError("simulate: n must be >= 1");
  const PartitionTree tree = illustration_tree();
  const Eigen::VectorXd e1 = embed(illustration_d1(), tree);
  const Eigen::VectorXd e2 = embed(illustration_d2(), tree);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double l1 = rng.normal();
    const double l2 = rng.normal();
    out.push_back(invert(l1 * e1 + l2 * e2, tree));
  }
  return out;
}

SpatialWeights ring_adjacency(int m) {
  if (m < 1) throw ValidationError("ring_adjacency: m must be >= 1");
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(m, m);
  if (m >= 2) {
    for (int i = 0; i < m; ++i) {
      raw(i, (i + 1) % m) = 1.0;
      raw(i, (i + m - 1) % m) = 1.0;
    }
  }
  return SpatialWeights::from_raw(std::move(raw));
}

std::vector<std::string> default_location_ids(int m) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    std::string num = std::to_string(i);
    while (num.size() < 4) num.insert(num.begin(), '0');
    ids.push_back("loc" + num);
  }
  return ids;
}

SimulatedModel simulate_from_model(const PartitionTree& tree, const CategorySpace& space,
                                   const SpatialWeights& weights,
                                   const Hyperparameters& hyper, int k_true,
                                   long long count_per_location, Rng& rng) {
  if (k_true < 0) throw ValidationError("simulate_from_model: k_true must be >= 0");
  if (count_per_location < 0) {
    throw ValidationError("simulate_from_model: count_per_location must be >= 0");
  }
  const TreeValidation tv = validate_tree(tree, space);
  if (!tv) throw ValidationError("simulate_from_model: invalid tree: " + tv.message);
  const int m = weights.size();
  Hyperparameters gen = hyper;
  gen.K = std::max(k_true, 1);
  SimulatedModel out;
  out.truth = draw_prior_state(gen, m, tree.n_internal(), weights, tree, rng);
  if (k_true == 0) {
    out.truth.Lambda.setZero();
    out.truth.Eta.setZero();
  }
  const Eigen::MatrixXd psi = out.truth.psi();
  out.counts.locations = default_location_ids(m);
  out.counts.categories = space.labels;
  out.counts.counts.resize(m, space.size());
  out.true_probs.reserve(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd p = invert(psi.row(i).transpose(), tree);
    out.true_probs.push_back(p);
    const Eigen::VectorXd draw = rng.multinomial_counts(count_per_location, p);
    for (int j = 0; j < space.size(); ++j) {
      out.counts.counts(i, j) = static_cast<CountsInt>(std::llround(draw[j]));
    }
  }
  return out;
}

}  // namespace tfa
