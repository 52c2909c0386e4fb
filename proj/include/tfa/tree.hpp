#pragma once

#include <string>
#include <vector>

namespace tfa {

// The finite category set the trees partition. Labels are opaque strings;
// they must match the counts-file header exactly and may not contain
// whitespace or parentheses (the tree grammar uses those as delimiters).
struct CategorySpace {
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(labels.size()); }
  int index_of(const std::string& label) const;
  void validate() const;  // unique labels, size >= 2, legal characters
};

struct TreeNode {
  std::vector<int> categories;  // sorted category indices covered by this node
  int left = -1;
  int right = -1;
  bool is_leaf() const { return left < 0 && right < 0; }
};

// Full binary partition tree over a CategorySpace. Nodes are stored in a flat
// vector; `internal_order` / `leaf_order` hold the canonical breadth-first
// (left before right) traversal used wherever node-indexed vectors are
// exchanged (psi, eta, mu).
struct PartitionTree {
  std::vector<TreeNode> nodes;
  int root = -1;
  std::vector<int> internal_order;
  std::vector<int> leaf_order;

  int n_internal() const { return static_cast<int>(internal_order.size()); }
  int n_leaves() const { return static_cast<int>(leaf_order.size()); }
  const TreeNode& node(int id) const { return nodes[static_cast<size_t>(id)]; }

  // Recomputes the canonical orders after direct node manipulation.
  void rebuild_orders();
};

struct TreeValidation {
  bool ok = true;
  std::string message;
  int node = -1;  // offending node id, -1 when not node-specific

  explicit operator bool() const { return ok; }
};

TreeValidation validate_tree(const PartitionTree& tree, const CategorySpace& space);

// Nested-text round trip. serialize emits a single line, e.g. "((a b) c)\n";
// parse rejects malformed input with line/column positions and unknown labels.
std::string serialize_tree(const PartitionTree& tree, const CategorySpace& space);
PartitionTree parse_tree(const std::string& text, const CategorySpace& space);

// Canonical internal-node handles (node ids), breadth-first, left before right.
std::vector<int> internal_nodes(const PartitionTree& tree);

// Deterministic balanced tree (recursive halving in label order); used as the
// default structure when no data-adaptive tree is supplied.
PartitionTree balanced_tree(const CategorySpace& space);

}  // namespace tfa
