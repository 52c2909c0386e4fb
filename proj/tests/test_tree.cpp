#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "tfa/errors.hpp"
#include "tfa/rng.hpp"
#include "tfa/tree.hpp"

using namespace tfa;

namespace {

CategorySpace make_space(int n, const std::string& prefix = "c") {
  CategorySpace space;
  for (int i = 0; i < n; ++i) space.labels.push_back(prefix + std::to_string(i + 1));
  return space;
}

// Random full binary tree by recursive random bipartition; the independent
// generator used as the round-trip oracle.
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

PartitionTree caterpillar(const CategorySpace& space) {
  std::string text;
  for (int i = 0; i < space.size() - 1; ++i) text += "(" + space.labels[i] + " ";
  text += space.labels.back();
  text += std::string(space.size() - 1, ')');
  return parse_tree(text, space);
}

}  // namespace

TEST_CASE("balanced tree over 4 categories validates with N = 3") {
  const CategorySpace space = make_space(4);
  const PartitionTree tree = parse_tree("((c1 c2) (c3 c4))", space);
  const TreeValidation v = validate_tree(tree, space);
  CHECK(v.ok);
  CHECK(tree.n_internal() == 3);
  CHECK(tree.n_leaves() == 4);
}

TEST_CASE("leaves sharing a category fail the partition invariant") {
  const CategorySpace space = make_space(4);
  // hand-built: two leaves carry c1
  PartitionTree tree;
  tree.nodes.push_back(TreeNode{{0}, -1, -1});       // 0: leaf c1
  tree.nodes.push_back(TreeNode{{0}, -1, -1});       // 1: leaf c1 again
  tree.nodes.push_back(TreeNode{{0}, 0, 1});         // 2: parent
  tree.root = 2;
  tree.rebuild_orders();
  const TreeValidation v = validate_tree(tree, space);
  CHECK_FALSE(v.ok);
  CHECK(v.message == "children do not partition parent");
  CHECK(v.node == 2);
}

TEST_CASE("caterpillar over 16 categories validates with N = 15") {
  const CategorySpace space = make_space(16);
  const PartitionTree tree = caterpillar(space);
  CHECK(validate_tree(tree, space).ok);
  CHECK(tree.n_internal() == 15);
}

TEST_CASE("smallest tree round-trips") {
  const CategorySpace space = make_space(2);
  const PartitionTree tree = parse_tree("(c1 c2)", space);
  const std::string text = serialize_tree(tree, space);
  CHECK(text == "(c1 c2)\n");
  const PartitionTree back = parse_tree(text, space);
  CHECK(serialize_tree(back, space) == text);
}

TEST_CASE("gender-by-age shaped tree round-trips with child order preserved") {
  CategorySpace space;
  for (const char* g : {"m", "f"}) {
    for (const char* a : {"15-19", "20-29", "30-39", "60plus"}) {
      space.labels.push_back(std::string(g) + "_" + a);
    }
  }
  // gender split at the root, age splits below
  const std::string text =
      "(((m_15-19 m_20-29) (m_30-39 m_60plus)) ((f_15-19 f_20-29) (f_30-39 f_60plus)))\n";
  const PartitionTree tree = parse_tree(text, space);
  CHECK(validate_tree(tree, space).ok);
  CHECK(serialize_tree(tree, space) == text);
  // root left child covers exactly the male categories
  const TreeNode& root = tree.node(tree.root);
  const std::vector<int> male{0, 1, 2, 3};
  CHECK(tree.node(root.left).categories == male);
}

TEST_CASE("random trees over 3-16 categories serialize byte-identically") {
  Rng rng(7);
  for (int n = 3; n <= 16; ++n) {
    const CategorySpace space = make_space(n);
    for (int rep = 0; rep < 20; ++rep) {
      const PartitionTree tree = random_tree(space, rng);
      REQUIRE(validate_tree(tree, space).ok);
      const std::string text = serialize_tree(tree, space);
      const PartitionTree back = parse_tree(text, space);
      REQUIRE(validate_tree(back, space).ok);
      CHECK(serialize_tree(back, space) == text);
      CHECK(back.n_internal() == n - 1);
    }
  }
}

TEST_CASE("tree files may span lines and carry comments") {
  const CategorySpace space = make_space(4);
  const std::string text =
      "# gender split at the root\n"
      "(\n  (c1 c2)   # young\n  (c3 c4)\n)\n";
  const PartitionTree tree = parse_tree(text, space);
  CHECK(validate_tree(tree, space).ok);
  CHECK(serialize_tree(tree, space) == "((c1 c2) (c3 c4))\n");
}

TEST_CASE("parse errors carry positions") {
  const CategorySpace space = make_space(3);
  CHECK_THROWS_WITH_AS(parse_tree("(c1 (c2 c9))", space),
                       doctest::Contains("unknown category label 'c9'"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_tree("(c1 (c2 c3)", space),
                       doctest::Contains("unexpected end of input"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_tree("(c1 c2 c3)", space), doctest::Contains("expected ')'"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_tree("(c1 c2) extra", space),
                       doctest::Contains("trailing content"), ValidationError);
}

TEST_CASE("internal_nodes returns canonical breadth-first handles") {
  const CategorySpace space4 = make_space(4);
  const PartitionTree balanced = parse_tree("((c1 c2) (c3 c4))", space4);
  const std::vector<int> order = internal_nodes(balanced);
  REQUIRE(order.size() == 3);
  CHECK(order[0] == balanced.root);
  CHECK(order[1] == balanced.node(balanced.root).left);
  CHECK(order[2] == balanced.node(balanced.root).right);

  const CategorySpace space16 = make_space(16);
  CHECK(internal_nodes(caterpillar(space16)).size() == 15);

  const CategorySpace space5 = make_space(5);
  const PartitionTree chain = caterpillar(space5);
  const std::vector<int> chain_order = internal_nodes(chain);
  REQUIRE(chain_order.size() == 4);
  CHECK(chain_order[0] == chain.root);
}

TEST_CASE("canonical ordering is stable under serialize/parse") {
  Rng rng(11);
  const CategorySpace space = make_space(9);
  for (int rep = 0; rep < 10; ++rep) {
    const PartitionTree tree = random_tree(space, rng);
    const PartitionTree back = parse_tree(serialize_tree(tree, space), space);
    REQUIRE(tree.internal_order.size() == back.internal_order.size());
    for (size_t i = 0; i < tree.internal_order.size(); ++i) {
      // compare by covered subsets (ids may differ between builds)
      CHECK(tree.node(tree.internal_order[i]).categories ==
            back.node(back.internal_order[i]).categories);
    }
  }
}

TEST_CASE("leaf subsets enumerate every category exactly once") {
  Rng rng(13);
  for (int n : {2, 5, 12}) {
    const CategorySpace space = make_space(n);
    const PartitionTree tree = random_tree(space, rng);
    std::multiset<int> seen;
    for (int id : tree.leaf_order) {
      for (int c : tree.node(id).categories) seen.insert(c);
    }
    CHECK(seen.size() == static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) CHECK(seen.count(c) == 1);
  }
}

TEST_CASE("category spaces reject duplicates and bad labels") {
  const CategorySpace dup{{"a", "a"}};
  const CategorySpace tiny{{"a"}};
  const CategorySpace spacey{{"a b", "c"}};
  const CategorySpace paren{{"a(", "c"}};
  CHECK_THROWS_AS(dup.validate(), ValidationError);
  CHECK_THROWS_AS(tiny.validate(), ValidationError);
  CHECK_THROWS_AS(spacey.validate(), ValidationError);
  CHECK_THROWS_AS(paren.validate(), ValidationError);
}

TEST_CASE("balanced_tree helper builds valid trees of any size") {
  for (int n : {2, 3, 7, 16}) {
    const CategorySpace space = make_space(n);
    const PartitionTree tree = balanced_tree(space);
    CHECK(validate_tree(tree, space).ok);
    CHECK(tree.n_internal() == n - 1);
  }
}
