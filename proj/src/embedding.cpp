#include "tfa/embedding.hpp"

#include <cmath>
#include <set>

#include "tfa/errors.hpp"
#include "tfa/mathutil.hpp"

namespace tfa {

Eigen::VectorXd CountMatrix::row_totals() const {
  return counts.rowwise().sum().cast<double>();
}

void CountMatrix::validate() const {
  if (locations.size() != static_cast<size_t>(counts.rows())) {
    throw ValidationError("counts: location ids do not match row count");
  }
  if (categories.size() != static_cast<size_t>(counts.cols())) {
    throw ValidationError("counts: category labels do not match column count");
  }
  space().validate();
  std::set<std::string> seen;
  for (const auto& id : locations) {
    if (id.empty()) throw ValidationError("counts: empty location id");
    if (!seen.insert(id).second) {
      throw ValidationError("counts: duplicate location id '" + id + "'");
    }
  }
  constexpr CountsInt kCellCap = 1'000'000'000'000'000LL;  // keeps row sums exact
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
      const CountsInt c = counts(i, j);
      if (c < 0) throw ValidationError("counts: negative cell at row " + std::to_string(i));
      if (c > kCellCap) throw ValidationError("counts: cell exceeds supported magnitude");
    }
  }
}

Eigen::VectorXd check_distribution(const Eigen::VectorXd& masses) {
  if (masses.size() < 2) throw ValidationError("distribution needs at least 2 masses");
  for (Eigen::Index i = 0; i < masses.size(); ++i) {
    if (!(masses[i] > 0.0) || !(masses[i] < 1.0) || !std::isfinite(masses[i])) {
      throw ValidationError("distribution mass " + std::to_string(i) +
                            " is not strictly inside (0,1)");
    }
  }
  const double s = masses.sum();
  if (std::abs(s - 1.0) > 1e-12) {
    throw ValidationError("distribution masses sum to " + std::to_string(s) +
                          ", outside tolerance 1e-12");
  }
  return masses / s;
}

namespace {

// Subtree masses for every node id, bottom-up.
std::vector<double> node_masses(const Eigen::VectorXd& p, const PartitionTree& tree) {
  std::vector<double> mass(tree.nodes.size(), 0.0);
  // Leaves first; parents are summed by walking internal nodes deepest-first,
  // which reversed BFS order guarantees.
  for (int id : tree.leaf_order) {
    mass[static_cast<size_t>(id)] = p[tree.node(id).categories.front()];
  }
  for (auto it = tree.internal_order.rbegin(); it != tree.internal_order.rend(); ++it) {
    const TreeNode& n = tree.node(*it);
    mass[static_cast<size_t>(*it)] =
        mass[static_cast<size_t>(n.left)] + mass[static_cast<size_t>(n.right)];
  }
  return mass;
}

}  // namespace

Eigen::VectorXd embed(const Eigen::VectorXd& masses, const PartitionTree& tree) {
  const Eigen::VectorXd p = check_distribution(masses);
  if (p.size() != tree.n_leaves()) {
    throw ValidationError("embed: distribution size does not match tree leaves");
  }
  const std::vector<double> mass = node_masses(p, tree);
  Eigen::VectorXd psi(tree.n_internal());
  for (int a = 0; a < tree.n_internal(); ++a) {
    const TreeNode& n = tree.node(tree.internal_order[static_cast<size_t>(a)]);
    // theta/(1-theta) = mass(A_l)/mass(A_r)
    psi[a] = std::log(mass[static_cast<size_t>(n.left)]) -
             std::log(mass[static_cast<size_t>(n.right)]);
  }
  return psi;
}

Eigen::VectorXd invert(const Eigen::VectorXd& psi, const PartitionTree& tree) {
  if (psi.size() != tree.n_internal()) {
    throw ValidationError("invert: psi size does not match internal nodes");
  }
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if (!std::isfinite(psi[i])) throw ValidationError("invert: non-finite psi entry");
  }
  std::vector<double> mass(tree.nodes.size(), 0.0);
  mass[static_cast<size_t>(tree.root)] = 1.0;
  for (int a = 0; a < tree.n_internal(); ++a) {
    const int id = tree.internal_order[static_cast<size_t>(a)];
    const TreeNode& n = tree.node(id);
    double pl, pr;
    sigmoid_pair(psi[a], &pl, &pr);
    mass[static_cast<size_t>(n.left)] = mass[static_cast<size_t>(id)] * pl;
    mass[static_cast<size_t>(n.right)] = mass[static_cast<size_t>(id)] * pr;
  }
  Eigen::VectorXd p(tree.n_leaves());
  for (int id : tree.leaf_order) {
    p[tree.node(id).categories.front()] = mass[static_cast<size_t>(id)];
  }
  return p;
}

NodeCounts aggregate_node_counts(const CountMatrix& counts, const PartitionTree& tree) {
  counts.validate();
  if (counts.n_categories() != tree.n_leaves()) {
    throw ValidationError("aggregate_node_counts: counts and tree disagree on categories");
  }
  const int m = counts.n_locations();
  const int n = tree.n_internal();
  std::vector<Eigen::Matrix<CountsInt, Eigen::Dynamic, 1>> mass(
      tree.nodes.size(), Eigen::Matrix<CountsInt, Eigen::Dynamic, 1>::Zero(m));
  for (int id : tree.leaf_order) {
    mass[static_cast<size_t>(id)] = counts.counts.col(tree.node(id).categories.front());
  }
  for (auto it = tree.internal_order.rbegin(); it != tree.internal_order.rend(); ++it) {
    const TreeNode& nd = tree.node(*it);
    mass[static_cast<size_t>(*it)] =
        mass[static_cast<size_t>(nd.left)] + mass[static_cast<size_t>(nd.right)];
  }
  NodeCounts out;
  out.n_node.resize(m, n);
  out.n_left.resize(m, n);
  out.kappa.resize(m, n);
  for (int a = 0; a < n; ++a) {
    const int id = tree.internal_order[static_cast<size_t>(a)];
    const TreeNode& nd = tree.node(id);
    out.n_node.col(a) = mass[static_cast<size_t>(id)];
    out.n_left.col(a) = mass[static_cast<size_t>(nd.left)];
    out.kappa.col(a) = mass[static_cast<size_t>(nd.left)].cast<double>() -
                       0.5 * mass[static_cast<size_t>(id)].cast<double>();
  }
  return out;
}

}  // namespace tfa
