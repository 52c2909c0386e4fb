#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tfa/embedding.hpp"
#include "tfa/errors.hpp"
#include "tfa/rng.hpp"
#include "tfa/tree.hpp"

using namespace tfa;

namespace {

CategorySpace make_space(int n) {
  CategorySpace space;
  for (int i = 0; i < n; ++i) space.labels.push_back("c" + std::to_string(i + 1));
  return space;
}

Eigen::VectorXd random_simplex(int n, Rng& rng) {
  Eigen::VectorXd alpha = Eigen::VectorXd::Constant(n, 1.0);
  return rng.dirichlet(alpha);
}

int random_subtree(PartitionTree& tree, std::vector<int> cats, Rng& rng) {
  if (cats.size() == 1) {
    tree.nodes.push_back(TreeNode{std::move(cats), -1, -1});
    return static_cast<int>(tree.nodes.size()) - 1;
  }
  std::vector<int> left, right;
  while (left.empty() || right.empty()) {
    left.clear();
    right.clear();
    for (int c : cats) (rng.uniform() < 0.5 ? left : right).push_back(c);
  }
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  const int l = random_subtree(tree, left, rng);
  const int r = random_subtree(tree, right, rng);
  tree.nodes.push_back(TreeNode{std::move(cats), l, r});
  return static_cast<int>(tree.nodes.size()) - 1;
}

PartitionTree random_tree(const CategorySpace& space, Rng& rng) {
  PartitionTree tree;
  std::vector<int> all;
  for (int c = 0; c < space.size(); ++c) all.push_back(c);
  tree.root = random_subtree(tree, std::move(all), rng);
  tree.rebuild_orders();
  return tree;
}

}  // namespace

TEST_CASE("uniform distribution on a balanced tree embeds to zero") {
  const CategorySpace space = make_space(4);
  const PartitionTree tree = parse_tree("((c1 c2) (c3 c4))", space);
  const Eigen::VectorXd psi = embed(Eigen::VectorXd::Constant(4, 0.25), tree);
  for (int a = 0; a < 3; ++a) CHECK(psi[a] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("d2 = (1/2, 1/3, 1/6) on the chain tree gives psi = (0, log 2)") {
  const CategorySpace space = make_space(3);
  const PartitionTree tree = parse_tree("(c1 (c2 c3))", space);
  Eigen::VectorXd p(3);
  p << 0.5, 1.0 / 3.0, 1.0 / 6.0;
  const Eigen::VectorXd psi = embed(p, tree);
  CHECK(psi[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(psi[1] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("invert(embed(p)) = p for 1000 random simplex points") {
  Rng rng(21);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 3 + static_cast<int>(rng.uniform() * 10);
    const CategorySpace space = make_space(n);
    const PartitionTree tree = random_tree(space, rng);
    const Eigen::VectorXd p = random_simplex(n, rng);
    const Eigen::VectorXd back = invert(embed(p, tree), tree);
    CHECK((back - p).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("zero vector inverts to the uniform distribution") {
  const CategorySpace space = make_space(4);
  const PartitionTree tree = parse_tree("((c1 c2) (c3 c4))", space);
  const Eigen::VectorXd p = invert(Eigen::VectorXd::Zero(3), tree);
  for (int j = 0; j < 4; ++j) CHECK(p[j] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("psi = (0, log 2) inverts to (1/2, 1/3, 1/6)") {
  const CategorySpace space = make_space(3);
  const PartitionTree tree = parse_tree("(c1 (c2 c3))", space);
  Eigen::VectorXd psi(2);
  psi << 0.0, std::log(2.0);
  const Eigen::VectorXd p = invert(psi, tree);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(p[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("embed(invert(v)) = v on random vectors in [-10, 10]^N") {
  Rng rng(22);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform() * 11);
    const CategorySpace space = make_space(n);
    const PartitionTree tree = random_tree(space, rng);
    Eigen::VectorXd v(n - 1);
    for (int a = 0; a < n - 1; ++a) v[a] = -10.0 + 20.0 * rng.uniform();
    const Eigen::VectorXd back = embed(invert(v, tree), tree);
    CHECK((back - v).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("inverted masses are positive and sum to one") {
  Rng rng(23);
  const CategorySpace space = make_space(8);
  const PartitionTree tree = random_tree(space, rng);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd v(7);
    for (int a = 0; a < 7; ++a) v[a] = -10.0 + 20.0 * rng.uniform();
    const Eigen::VectorXd p = invert(v, tree);
    CHECK(p.minCoeff() > 0.0);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("raising one psi coordinate moves mass into that node's left leaves only") {
  Rng rng(24);
  const CategorySpace space = make_space(6);
  const PartitionTree tree = random_tree(space, rng);
  Eigen::VectorXd v(5);
  for (int a = 0; a < 5; ++a) v[a] = rng.normal();
  const int target = 2;
  Eigen::VectorXd v_up = v;
  v_up[target] += 0.75;
  const Eigen::VectorXd p0 = invert(v, tree);
  const Eigen::VectorXd p1 = invert(v_up, tree);
  const TreeNode& node = tree.node(tree.internal_order[target]);
  double left0 = 0.0, left1 = 0.0;
  for (int c : tree.node(node.left).categories) {
    left0 += p0[c];
    left1 += p1[c];
  }
  CHECK(left1 > left0);
  // categories outside the node keep their masses
  for (int c = 0; c < 6; ++c) {
    if (std::find(node.categories.begin(), node.categories.end(), c) ==
        node.categories.end()) {
      CHECK(p1[c] == doctest::Approx(p0[c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("embed rejects zero and off-simplex masses") {
  const CategorySpace space = make_space(3);
  const PartitionTree tree = parse_tree("(c1 (c2 c3))", space);
  Eigen::VectorXd with_zero(3);
  with_zero << 0.0, 0.5, 0.5;
  CHECK_THROWS_AS(embed(with_zero, tree), ValidationError);
  Eigen::VectorXd off_sum(3);
  off_sum << 0.3, 0.3, 0.3;
  CHECK_THROWS_AS(embed(off_sum, tree), ValidationError);
  Eigen::VectorXd ok(3);
  ok << 0.25, 0.5, 0.25;
  CHECK_NOTHROW(embed(ok, tree));
}

TEST_CASE("node count aggregation on the balanced 4-category tree") {
  const CategorySpace space = make_space(4);
  const PartitionTree tree = parse_tree("((c1 c2) (c3 c4))", space);
  CountMatrix counts;
  counts.locations = {"loc1"};
  counts.categories = space.labels;
  counts.counts.resize(1, 4);
  counts.counts << 3, 1, 2, 2;
  const NodeCounts nc = aggregate_node_counts(counts, tree);
  CHECK(nc.n_node(0, 0) == 8);   // root
  CHECK(nc.n_left(0, 0) == 4);   // {c1,c2}
  CHECK(nc.kappa(0, 0) == doctest::Approx(0.0));
  CHECK(nc.n_node(0, 1) == 4);
  CHECK(nc.n_left(0, 1) == 3);
  CHECK(nc.kappa(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("all-zero rows aggregate to zero counts and kappa") {
  const CategorySpace space = make_space(4);
  const PartitionTree tree = parse_tree("((c1 c2) (c3 c4))", space);
  CountMatrix counts;
  counts.locations = {"a", "b"};
  counts.categories = space.labels;
  counts.counts = CountTable::Zero(2, 4);
  counts.counts(1, 0) = 5;
  const NodeCounts nc = aggregate_node_counts(counts, tree);
  for (int a = 0; a < 3; ++a) {
    CHECK(nc.n_node(0, a) == 0);
    CHECK(nc.kappa(0, a) == 0.0);
  }
}

TEST_CASE("aggregation matches brute-force subset sums on a random matrix") {
  Rng rng(25);
  const CategorySpace space = make_space(8);
  const PartitionTree tree = random_tree(space, rng);
  CountMatrix counts;
  counts.categories = space.labels;
  counts.counts.resize(5, 8);
  for (int i = 0; i < 5; ++i) {
    counts.locations.push_back("loc" + std::to_string(i));
    for (int j = 0; j < 8; ++j) {
      counts.counts(i, j) = static_cast<CountsInt>(rng.uniform() * 1000000.0);
    }
  }
  const NodeCounts nc = aggregate_node_counts(counts, tree);
  for (int a = 0; a < tree.n_internal(); ++a) {
    const TreeNode& node = tree.node(tree.internal_order[a]);
    for (int i = 0; i < 5; ++i) {
      CountsInt total = 0, left = 0;
      for (int c : node.categories) total += counts.counts(i, c);
      for (int c : tree.node(node.left).categories) left += counts.counts(i, c);
      CHECK(nc.n_node(i, a) == total);
      CHECK(nc.n_left(i, a) == left);
      CHECK(nc.kappa(i, a) ==
            doctest::Approx(static_cast<double>(left) - 0.5 * static_cast<double>(total)));
    }
  }
}
