#pragma once

#include <Eigen/Dense>
#include <compare>
#include <vector>

#include "umed/errors.hpp"

namespace umed {

// Points are 1-based on every external surface (files, CLI, reports) and
// converted to 0-based offsets at this boundary.
class PointId {
public:
  explicit constexpr PointId(int index) : index_(index) {}

  constexpr int index() const { return index_; }       // 1-based
  constexpr int offset() const { return index_ - 1; }  // 0-based

  friend constexpr auto operator<=>(PointId, PointId) = default;

private:
  int index_;
};

// A finite point set with pairwise distance access. Immutable after
// construction; safe for concurrent reads.
class Space {
public:
  virtual ~Space() = default;

  virtual int size() const = 0;

  // 0-based access for internal loops. No range checks.
  virtual double at(int i, int j) const = 0;

  // 1-based checked access. Throws DomainError on an out-of-range id.
  double distance(PointId a, PointId b) const;
};

// Explicit n-by-n distance matrix.
class DistanceMatrixSpace final : public Space {
public:
  // Throws FormatError if the matrix is empty or not square. Entries are not
  // checked here; axiom checks belong to validate().
  explicit DistanceMatrixSpace(Eigen::MatrixXd d);

  int size() const override { return static_cast<int>(d_.rows()); }
  double at(int i, int j) const override { return d_(i, j); }

  const Eigen::MatrixXd& matrix() const { return d_; }

  DistanceMatrixSpace scaled(double factor) const;

private:
  Eigen::MatrixXd d_;
};

// Rooted tree whose leaves are the points; the distance between two leaves is
// the height of their lowest common ancestor. Heights strictly increase from
// leaves (height 0) to the root, so the induced distance is an ultrametric by
// construction.
class DendrogramSpace final : public Space {
public:
  struct Node {
    double height = 0.0;        // 0 for leaves, positive for internal nodes
    int point = -1;             // 0-based point for leaves, -1 for internal
    std::vector<int> children;  // empty for leaves
    int parent = -1;            // filled at construction
    int depth = 0;              // filled at construction
  };

  // Takes ownership of the node arena. Throws FormatError unless `root`
  // spans every node exactly once, internal nodes have >= 2 children and
  // heights strictly above their children's, and the leaves carry the point
  // labels 0..n-1 exactly once.
  DendrogramSpace(std::vector<Node> nodes, int root);

  int size() const override { return static_cast<int>(leaf_node_.size()); }
  double at(int i, int j) const override;  // LCA height

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_[id]; }
  int root() const { return root_; }
  int leaf_node(int point) const { return leaf_node_[point]; }

  DendrogramSpace scaled(double factor) const;

private:
  std::vector<Node> nodes_;
  std::vector<int> leaf_node_;  // point -> node id
  int root_;
};

// Materializes the LCA-height matrix. The result always validates as an
// ultrametric.
DistanceMatrixSpace dendrogram_to_matrix(const DendrogramSpace& tree);

}  // namespace umed
