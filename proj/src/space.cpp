#include "umed/space.hpp"

#include <string>
#include <utility>

namespace umed {

double Space::distance(PointId a, PointId b) const {
  const int n = size();
  if (a.index() < 1 || a.index() > n || b.index() < 1 || b.index() > n) {
    throw DomainError("point id out of range [1, " + std::to_string(n) +
                      "]: got (" + std::to_string(a.index()) + ", " +
                      std::to_string(b.index()) + ")");
  }
  return at(a.offset(), b.offset());
}

DistanceMatrixSpace::DistanceMatrixSpace(Eigen::MatrixXd d) : d_(std::move(d)) {
  if (d_.rows() == 0 || d_.cols() == 0)
    throw FormatError("distance matrix must be non-empty");
  if (d_.rows() != d_.cols())
    throw FormatError("distance matrix must be square, got " +
                      std::to_string(d_.rows()) + "x" +
                      std::to_string(d_.cols()));
}

DendrogramSpace::DendrogramSpace(std::vector<Node> nodes, int root)
    : nodes_(std::move(nodes)), root_(root) {
  const int count = static_cast<int>(nodes_.size());
  if (count == 0 || root_ < 0 || root_ >= count)
    throw FormatError("dendrogram root out of range");

  for (Node& node : nodes_) {
    node.parent = -1;
    node.depth = 0;
  }

  // Iterative DFS from the root: assign parents and depths, reject revisits
  // (shared children or cycles), collect leaves.
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<int> stack{root_};
  seen[root_] = 1;
  int visited = 0;
  int leaf_count = 0;
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    ++visited;
    const Node& node = nodes_[id];
    if (node.children.empty()) {
      if (node.point < 0)
        throw FormatError("leaf node without a point label");
      if (node.height != 0.0)
        throw FormatError("leaf height must be 0");
      ++leaf_count;
      continue;
    }
    if (node.point >= 0)
      throw FormatError("internal node carries a point label");
    if (node.children.size() < 2)
      throw FormatError("internal node must have at least 2 children");
    if (!(node.height > 0.0))
      throw FormatError("internal node height must be positive");
    for (int child : node.children) {
      if (child < 0 || child >= count)
        throw FormatError("dendrogram child id out of range");
      if (seen[child])
        throw FormatError("dendrogram is not a tree (node reached twice)");
      if (!(nodes_[child].height < node.height))
        throw FormatError("heights must strictly increase toward the root");
      seen[child] = 1;
      nodes_[child].parent = id;
      nodes_[child].depth = node.depth + 1;
      stack.push_back(child);
    }
  }
  if (visited != count)
    throw FormatError("dendrogram has nodes unreachable from the root");

  // Leaves must carry the labels 0..n-1 exactly once.
  leaf_node_.assign(leaf_count, -1);
  for (int id = 0; id < count; ++id) {
    const Node& node = nodes_[id];
    if (!node.children.empty()) continue;
    if (node.point >= leaf_count)
      throw FormatError("leaf labels must form p1..pn, got p" +
                        std::to_string(node.point + 1) + " with n = " +
                        std::to_string(leaf_count));
    if (leaf_node_[node.point] != -1)
      throw FormatError("duplicate leaf label p" +
                        std::to_string(node.point + 1));
    leaf_node_[node.point] = id;
  }
}

double DendrogramSpace::at(int i, int j) const {
  if (i == j) return 0.0;
  int a = leaf_node_[i];
  int b = leaf_node_[j];
  while (nodes_[a].depth > nodes_[b].depth) a = nodes_[a].parent;
  while (nodes_[b].depth > nodes_[a].depth) b = nodes_[b].parent;
  while (a != b) {
    a = nodes_[a].parent;
    b = nodes_[b].parent;
  }
  return nodes_[a].height;
}

DistanceMatrixSpace DistanceMatrixSpace::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("scale factor must be positive");
  return DistanceMatrixSpace(factor * d_);
}

DendrogramSpace DendrogramSpace::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("scale factor must be positive");
  std::vector<Node> nodes = nodes_;
  for (Node& node : nodes)
    if (!node.children.empty()) node.height *= factor;
  return DendrogramSpace(std::move(nodes), root_);
}

DistanceMatrixSpace dendrogram_to_matrix(const DendrogramSpace& tree) {
  const int n = tree.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);

  // Post-order accumulation of leaf lists: pairs of leaves that first meet at
  // a node sit at that node's height. Total work is O(n^2).
  std::vector<std::vector<int>> leaves(tree.node_count());
  std::vector<int> order;
  order.reserve(tree.node_count());
  std::vector<int> stack{tree.root()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    order.push_back(id);
    for (int child : tree.node(id).children) stack.push_back(child);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int id = *it;
    const auto& node = tree.node(id);
    if (node.children.empty()) {
      leaves[id] = {node.point};
      continue;
    }
    auto& mine = leaves[id];
    for (int child : node.children) {
      for (int a : mine) {
        for (int b : leaves[child]) {
          d(a, b) = node.height;
          d(b, a) = node.height;
        }
      }
      mine.insert(mine.end(), leaves[child].begin(), leaves[child].end());
      leaves[child].clear();
      leaves[child].shrink_to_fit();
    }
  }
  return DistanceMatrixSpace(std::move(d));
}

}  // namespace umed
