#include "tfa/tree.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>
#include <sstream>

#include "tfa/errors.hpp"

namespace tfa {

int CategorySpace::index_of(const std::string& label) const {
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return -1;
}

void CategorySpace::validate() const {
  if (labels.size() < 2) {
    throw ValidationError("category space needs at least 2 categories");
  }
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) throw ValidationError("empty category label");
    for (char c : l) {
      if (c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c))) {
        throw ValidationError("category label '" + l +
                              "' contains whitespace or parentheses");
      }
    }
    if (!seen.insert(l).second) {
      throw ValidationError("duplicate category label '" + l + "'");
    }
  }
}

void PartitionTree::rebuild_orders() {
  internal_order.clear();
  leaf_order.clear();
  if (root < 0) return;
  std::deque<int> queue{root};
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    const TreeNode& n = nodes[static_cast<size_t>(id)];
    if (n.is_leaf()) {
      leaf_order.push_back(id);
    } else {
      internal_order.push_back(id);
      if (n.left >= 0) queue.push_back(n.left);
      if (n.right >= 0) queue.push_back(n.right);
    }
  }
}

namespace {

TreeValidation fail(std::string msg, int node = -1) {
  return TreeValidation{false, std::move(msg), node};
}

bool is_sorted_unique(const std::vector<int>& v) {
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] <= v[i - 1]) return false;
  }
  return true;
}

}  // namespace

TreeValidation validate_tree(const PartitionTree& tree, const CategorySpace& space) {
  space.validate();
  const int n_nodes = static_cast<int>(tree.nodes.size());
  if (tree.root < 0 || tree.root >= n_nodes) return fail("missing or invalid root");

  // Reachability: every node referenced exactly once, no cycles.
  std::vector<int> refcount(static_cast<size_t>(n_nodes), 0);
  std::deque<int> queue{tree.root};
  int visited = 0;
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    if (++visited > n_nodes) return fail("cycle or shared node in tree");
    const TreeNode& n = tree.nodes[static_cast<size_t>(id)];
    const bool has_l = n.left >= 0, has_r = n.right >= 0;
    if (has_l != has_r) return fail("internal node must have exactly two children", id);
    if (!is_sorted_unique(n.categories) || n.categories.empty()) {
      return fail("node subset must be a nonempty sorted set of category indices", id);
    }
    for (int c : n.categories) {
      if (c < 0 || c >= space.size()) return fail("category index out of range", id);
    }
    if (has_l) {
      for (int ch : {n.left, n.right}) {
        if (ch < 0 || ch >= n_nodes) return fail("child index out of range", id);
        if (++refcount[static_cast<size_t>(ch)] > 1) return fail("node has two parents", ch);
        queue.push_back(ch);
      }
      const auto& l = tree.nodes[static_cast<size_t>(n.left)].categories;
      const auto& r = tree.nodes[static_cast<size_t>(n.right)].categories;
      std::vector<int> merged;
      std::merge(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(merged));
      std::vector<int> inter;
      std::set_intersection(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(inter));
      if (!inter.empty() || merged != n.categories || l.empty() || r.empty()) {
        return fail("children do not partition parent", id);
      }
    } else if (n.categories.size() != 1) {
      return fail("leaf subset must be a single category", id);
    }
  }

  const auto& root_cats = tree.nodes[static_cast<size_t>(tree.root)].categories;
  if (static_cast<int>(root_cats.size()) != space.size()) {
    return fail("root subset does not cover the category space", tree.root);
  }
  if (tree.n_internal() != space.size() - 1 ||
      tree.n_leaves() != space.size()) {
    return fail("canonical orders are stale; call rebuild_orders()");
  }
  return TreeValidation{};
}

std::vector<int> internal_nodes(const PartitionTree& tree) { return tree.internal_order; }

namespace {

void serialize_node(const PartitionTree& tree, const CategorySpace& space, int id,
                    std::string& out) {
  const TreeNode& n = tree.node(id);
  if (n.is_leaf()) {
    out += space.labels[static_cast<size_t>(n.categories.front())];
    return;
  }
  out += '(';
  serialize_node(tree, space, n.left, out);
  out += ' ';
  serialize_node(tree, space, n.right, out);
  out += ')';
}

struct Token {
  enum Kind { kOpen, kClose, kLabel } kind;
  std::string text;
  int line;
  int column;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  int line = 1, col = 1;
  size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
    } else if (c == '#') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(') {
      tokens.push_back({Token::kOpen, "(", line, col});
      ++col;
      ++i;
    } else if (c == ')') {
      tokens.push_back({Token::kClose, ")", line, col});
      ++col;
      ++i;
    } else {
      const int start_col = col;
      std::string label;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
             text[i] != '(' && text[i] != ')' && text[i] != '#') {
        label += text[i];
        ++i;
        ++col;
      }
      tokens.push_back({Token::kLabel, label, line, start_col});
    }
  }
  return tokens;
}

[[noreturn]] void parse_fail(const std::string& msg, int line, int col) {
  std::ostringstream os;
  os << "tree parse error at line " << line << ", column " << col << ": " << msg;
  throw ValidationError(os.str());
}

class TreeParser {
 public:
  TreeParser(std::vector<Token> tokens, const CategorySpace& space)
      : tokens_(std::move(tokens)), space_(space) {}

  PartitionTree parse() {
    if (tokens_.empty()) parse_fail("empty input", 1, 1);
    PartitionTree tree;
    tree.root = parse_node(tree);
    if (pos_ != tokens_.size()) {
      const Token& t = tokens_[pos_];
      parse_fail("trailing content after tree", t.line, t.column);
    }
    tree.rebuild_orders();
    return tree;
  }

 private:
  const Token& peek() {
    if (pos_ >= tokens_.size()) {
      const Token& last = tokens_.back();
      parse_fail("unexpected end of input", last.line, last.column);
    }
    return tokens_[pos_];
  }

  int parse_node(PartitionTree& tree) {
    const Token& t = peek();
    if (t.kind == Token::kLabel) {
      ++pos_;
      const int idx = space_.index_of(t.text);
      if (idx < 0) parse_fail("unknown category label '" + t.text + "'", t.line, t.column);
      tree.nodes.push_back(TreeNode{{idx}, -1, -1});
      return static_cast<int>(tree.nodes.size()) - 1;
    }
    if (t.kind != Token::kOpen) parse_fail("expected '(' or label", t.line, t.column);
    ++pos_;
    const int left = parse_node(tree);
    const int right = parse_node(tree);
    const Token& close = peek();
    if (close.kind != Token::kClose) {
      parse_fail("expected ')' (internal nodes have exactly two children)",
                 close.line, close.column);
    }
    ++pos_;
    const auto& l = tree.nodes[static_cast<size_t>(left)].categories;
    const auto& r = tree.nodes[static_cast<size_t>(right)].categories;
    std::vector<int> merged;
    std::set_union(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(merged));
    tree.nodes.push_back(TreeNode{std::move(merged), left, right});
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  std::vector<Token> tokens_;
  const CategorySpace& space_;
  size_t pos_ = 0;
};

}  // namespace

std::string serialize_tree(const PartitionTree& tree, const CategorySpace& space) {
  const TreeValidation v = validate_tree(tree, space);
  if (!v) throw ValidationError("serialize_tree: invalid tree: " + v.message);
  std::string out;
  serialize_node(tree, space, tree.root, out);
  out += '\n';
  return out;
}

PartitionTree parse_tree(const std::string& text, const CategorySpace& space) {
  space.validate();
  return TreeParser(tokenize(text), space).parse();
}

namespace {

int build_balanced(PartitionTree& tree, int lo, int hi) {  // categories [lo, hi)
  if (hi - lo == 1) {
    tree.nodes.push_back(TreeNode{{lo}, -1, -1});
    return static_cast<int>(tree.nodes.size()) - 1;
  }
  const int mid = lo + (hi - lo + 1) / 2;
  const int left = build_balanced(tree, lo, mid);
  const int right = build_balanced(tree, mid, hi);
  std::vector<int> cats;
  for (int c = lo; c < hi; ++c) cats.push_back(c);
  tree.nodes.push_back(TreeNode{std::move(cats), left, right});
  return static_cast<int>(tree.nodes.size()) - 1;
}

}  // namespace

PartitionTree balanced_tree(const CategorySpace& space) {
  space.validate();
  PartitionTree tree;
  tree.root = build_balanced(tree, 0, space.size());
  tree.rebuild_orders();
  return tree;
}

}  // namespace tfa
