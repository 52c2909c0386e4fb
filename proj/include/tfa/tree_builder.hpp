#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tfa/embedding.hpp"
#include "tfa/tree.hpp"

namespace tfa {

struct SplitCandidate {
  std::vector<int> parent;
  std::vector<int> left;
  std::vector<int> right;
  double score = 0.0;  // balance variance across the input distributions
};

struct TreeBuilderOptions {
  double pseudo_mass = 0.5;  // added to every cell before normalizing counts
  int exhaustive_limit = 20; // largest category set we will enumerate (2^{n-1}-1 splits)

  void validate() const;
};

// ilr balance of one split: sqrt(|L||R|/(|L|+|R|)) * log(g(L)/g(R)), where
// g is the geometric mean of the masses in the subset.
double balance(const Eigen::VectorXd& masses, const std::vector<int>& left,
               const std::vector<int>& right);

// Sample variance (denominator M-1) of the balances across distributions.
double split_score(const std::vector<Eigen::VectorXd>& distributions,
                   const std::vector<int>& left, const std::vector<int>& right);

// Per-location distributions proportional to (count + pseudo_mass).
std::vector<Eigen::VectorXd> smooth_counts(const CountMatrix& counts, double pseudo_mass);

// Greedy maximum-variance tree: at every node, enumerate all unordered
// bipartitions, keep the one with the largest balance variance, recurse.
// The left child is the subset containing the smallest category index; exact
// score ties go to the lexicographically smallest left subset.
PartitionTree build_mv_tree(const std::vector<Eigen::VectorXd>& distributions,
                            const CategorySpace& space, const TreeBuilderOptions& options);

}  // namespace tfa
