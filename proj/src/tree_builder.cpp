#include "tfa/tree_builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tfa/errors.hpp"

namespace tfa {

void TreeBuilderOptions::validate() const {
  if (!(pseudo_mass > 0.0)) throw ValidationError("pseudo_mass must be positive");
  if (exhaustive_limit < 2) throw ValidationError("exhaustive_limit must be at least 2");
}

namespace {

double mean_log_mass(const Eigen::VectorXd& masses, const std::vector<int>& subset) {
  double s = 0.0;
  for (int c : subset) {
    const double m = masses[c];
    if (!(m > 0.0)) throw ValidationError("balance requires strictly positive masses");
    s += std::log(m);
  }
  return s / static_cast<double>(subset.size());
}

}  // namespace

double balance(const Eigen::VectorXd& masses, const std::vector<int>& left,
               const std::vector<int>& right) {
  if (left.empty() || right.empty()) throw ValidationError("balance: empty split side");
  const double nl = static_cast<double>(left.size());
  const double nr = static_cast<double>(right.size());
  const double coef = std::sqrt(nl * nr / (nl + nr));
  return coef * (mean_log_mass(masses, left) - mean_log_mass(masses, right));
}

double split_score(const std::vector<Eigen::VectorXd>& distributions,
                   const std::vector<int>& left, const std::vector<int>& right) {
  const size_t m = distributions.size();
  if (m < 2) throw ValidationError("split_score needs at least 2 distributions");
  double mean = 0.0;
  std::vector<double> vals(m);
  for (size_t i = 0; i < m; ++i) {
    vals[i] = balance(distributions[i], left, right);
    mean += vals[i];
  }
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(m - 1);
}

std::vector<Eigen::VectorXd> smooth_counts(const CountMatrix& counts, double pseudo_mass) {
  if (!(pseudo_mass > 0.0)) throw ValidationError("pseudo_mass must be positive");
  counts.validate();
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<size_t>(counts.n_locations()));
  for (int i = 0; i < counts.n_locations(); ++i) {
    Eigen::VectorXd p =
        counts.counts.row(i).cast<double>().array() + pseudo_mass;
    out.push_back(p / p.sum());
  }
  return out;
}

namespace {

struct BestSplit {
  std::vector<int> left, right;
  double score = -1.0;
  bool found = false;
};

// Enumerates all unordered bipartitions of `subset`; the smallest index is
// pinned to the left side so each pair appears once.
BestSplit best_split(const std::vector<Eigen::VectorXd>& dists,
                     const std::vector<int>& subset) {
  const int k = static_cast<int>(subset.size());
  BestSplit best;
  const std::uint64_t all_left = (1ULL << (k - 1)) - 1;  // right side would be empty
  for (std::uint64_t mask = 0; mask < all_left; ++mask) {
    std::vector<int> left{subset[0]}, right;
    for (int j = 1; j < k; ++j) {
      if (mask & (1ULL << (j - 1))) {
        left.push_back(subset[j]);
      } else {
        right.push_back(subset[j]);
      }
    }
    const double score = split_score(dists, left, right);
    const bool better =
        !best.found || score > best.score ||
        (score == best.score && std::lexicographical_compare(
                                    left.begin(), left.end(),
                                    best.left.begin(), best.left.end()));
    if (better) {
      best = BestSplit{std::move(left), std::move(right), score, true};
    }
  }
  return best;
}

int build_node(const std::vector<Eigen::VectorXd>& dists, const std::vector<int>& subset,
               PartitionTree& tree) {
  if (subset.size() == 1) {
    tree.nodes.push_back(TreeNode{subset, -1, -1});
    return static_cast<int>(tree.nodes.size()) - 1;
  }
  BestSplit split = best_split(dists, subset);
  const int left = build_node(dists, split.left, tree);
  const int right = build_node(dists, split.right, tree);
  tree.nodes.push_back(TreeNode{subset, left, right});
  return static_cast<int>(tree.nodes.size()) - 1;
}

}  // namespace

PartitionTree build_mv_tree(const std::vector<Eigen::VectorXd>& distributions,
                            const CategorySpace& space, const TreeBuilderOptions& options) {
  options.validate();
  space.validate();
  if (space.size() > options.exhaustive_limit) {
    throw ValidationError("build_mv_tree: " + std::to_string(space.size()) +
                          " categories exceed exhaustive_limit " +
                          std::to_string(options.exhaustive_limit));
  }
  if (distributions.size() < 2) {
    throw ValidationError("build_mv_tree needs at least 2 distributions");
  }
  for (const auto& d : distributions) {
    if (d.size() != space.size()) {
      throw ValidationError("build_mv_tree: distribution size does not match space");
    }
  }
  std::vector<int> all(static_cast<size_t>(space.size()));
  for (int c = 0; c < space.size(); ++c) all[static_cast<size_t>(c)] = c;
  PartitionTree tree;
  tree.root = build_node(distributions, all, tree);
  tree.rebuild_orders();
  return tree;
}

}  // namespace tfa
