#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfa/tree.hpp"

namespace tfa {

using CountsInt = std::int64_t;
using CountTable = Eigen::Matrix<CountsInt, Eigen::Dynamic, Eigen::Dynamic>;

// Observed frequencies: one row per location, one column per category, in
// CategorySpace order.
struct CountMatrix {
  std::vector<std::string> locations;
  std::vector<std::string> categories;
  CountTable counts;

  int n_locations() const { return static_cast<int>(counts.rows()); }
  int n_categories() const { return static_cast<int>(counts.cols()); }
  CategorySpace space() const { return CategorySpace{categories}; }
  Eigen::VectorXd row_totals() const;
  void validate() const;
};

// Per-node aggregates of a CountMatrix along a tree: n_i(A), n_i(A_l) and the
// pseudo-regression offset kappa_i(A) = n_i(A_l) - n_i(A)/2, all M x N with
// columns in canonical internal-node order.
struct NodeCounts {
  CountTable n_node;
  CountTable n_left;
  Eigen::MatrixXd kappa;

  int n_locations() const { return static_cast<int>(n_node.rows()); }
  int n_nodes() const { return static_cast<int>(n_node.cols()); }
};

// Checks masses strictly positive and summing to 1 within 1e-12; returns the
// renormalized vector (bad input is rejected, not silently fixed).
Eigen::VectorXd check_distribution(const Eigen::VectorXd& masses);

// The tree-logit embedding: psi(A) = log(mass(A_l)/mass(A_r)) for each
// internal node, in canonical order.
Eigen::VectorXd embed(const Eigen::VectorXd& masses, const PartitionTree& tree);

// Inverse embedding by mass propagation from the root.
Eigen::VectorXd invert(const Eigen::VectorXd& psi, const PartitionTree& tree);

NodeCounts aggregate_node_counts(const CountMatrix& counts, const PartitionTree& tree);

}  // namespace tfa
