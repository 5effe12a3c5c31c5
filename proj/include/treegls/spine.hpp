#pragma once

// Rooted tree with uniform leaf depth: the hierarchy the estimator runs on.
// Immutable after construction; safe for concurrent reads.

#include <utility>
#include <vector>

namespace treegls {

using VertexId = int;

struct Tree {
  int root = 0;
  int depth = 0;  // L: every leaf sits at this level
  std::vector<int> parent;                 // parent[v], -1 for the root
  std::vector<std::vector<int>> children;  // sorted ascending by id
  std::vector<int> level;                  // 0 (root) .. depth (leaves)
  std::vector<std::vector<int>> levels;    // level -> vertices, ascending

  int vertex_count() const { return static_cast<int>(parent.size()); }
  bool contains(VertexId v) const { return v >= 0 && v < vertex_count(); }
  bool is_leaf(VertexId v) const { return children[v].empty(); }
  // Leaves in ascending id order (== levels[depth]).
  const std::vector<int>& leaves() const { return levels[depth]; }
};

// Builds and validates a tree from (child, parent) pairs. The vertex universe
// is 0..max mentioned id. Children lists are sorted ascending by id so every
// summation over children has a fixed order. Rejects: repeated child ids
// (DuplicateVertex), a parent entry for the declared root (CycleDetected),
// non-root vertices without a parent (MultipleRoots when used as a parent,
// OrphanVertex otherwise), parent cycles (CycleDetected), and leaves at
// differing depths (NonUniformLeafDepth; padding shallow leaves with
// pseudo-vertices is a manual pre-processing step, not done here).
Tree build_tree(const std::vector<std::pair<VertexId, VertexId>>& child_parent_pairs,
                VertexId root);

// Deepest vertex that is an ancestor-or-self of both u and v.
VertexId closest_common_ancestor(const Tree& t, VertexId u, VertexId v);

// Path [u, ..., u^v, ..., v] through the closest common ancestor.
// path[0] == u and path.back() == v.
std::vector<VertexId> shortest_path(const Tree& t, VertexId u, VertexId v);

// Leaves of the subtree rooted at g, ascending by id (g itself if a leaf).
std::vector<VertexId> descendant_leaves(const Tree& t, VertexId g);

}  // namespace treegls
