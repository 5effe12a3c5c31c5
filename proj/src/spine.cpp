#include "treegls/spine.hpp"

#include <algorithm>
#include <string>

#include "treegls/errors.hpp"

namespace treegls {

namespace {

void require_known(const Tree& t, VertexId v) {
  if (!t.contains(v)) {
    throw UnknownVertex("vertex " + std::to_string(v) + " is not in the tree (0.." +
                        std::to_string(t.vertex_count() - 1) + ")");
  }
}

}  // namespace

Tree build_tree(const std::vector<std::pair<VertexId, VertexId>>& child_parent_pairs,
                VertexId root) {
  if (root < 0) throw UnknownVertex("root id must be nonnegative, got " + std::to_string(root));

  int max_id = root;
  for (const auto& [c, p] : child_parent_pairs) {
    if (c < 0 || p < 0) {
      throw UnknownVertex("vertex ids must be nonnegative, got (" + std::to_string(c) + "," +
                          std::to_string(p) + ")");
    }
    max_id = std::max({max_id, c, p});
  }
  const int v_count = max_id + 1;

  Tree t;
  t.root = root;
  t.parent.assign(v_count, -1);
  t.children.assign(v_count, {});

  std::vector<char> has_parent(v_count, 0);
  std::vector<char> used_as_parent(v_count, 0);
  for (const auto& [c, p] : child_parent_pairs) {
    if (has_parent[c]) {
      throw DuplicateVertex("vertex " + std::to_string(c) + " listed with two parents");
    }
    has_parent[c] = 1;
    used_as_parent[p] = 1;
    t.parent[c] = p;
    t.children[p].push_back(c);
  }

  if (has_parent[root]) {
    throw CycleDetected("declared root " + std::to_string(root) +
                        " has a parent; its parent chain cannot terminate");
  }
  for (int v = 0; v < v_count; ++v) {
    if (v == root || has_parent[v]) continue;
    if (used_as_parent[v]) {
      throw MultipleRoots("vertex " + std::to_string(v) +
                          " has no parent and is not the declared root");
    }
    throw OrphanVertex("vertex id " + std::to_string(v) +
                       " is in the id range but never connected");
  }
  for (auto& kids : t.children) std::sort(kids.begin(), kids.end());

  // Level assignment by traversal from the root; anything unreached has a
  // parent (checked above) so it must sit on a cycle.
  t.level.assign(v_count, -1);
  t.level[root] = 0;
  std::vector<int> frontier{root};
  int reached = 1;
  int depth = 0;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int g : frontier) {
      for (int c : t.children[g]) {
        t.level[c] = t.level[g] + 1;
        depth = std::max(depth, t.level[c]);
        ++reached;
        next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
  if (reached != v_count) {
    throw CycleDetected(std::to_string(v_count - reached) +
                        " vertices unreachable from the root (parent cycle)");
  }

  t.depth = depth;
  t.levels.assign(depth + 1, {});
  for (int v = 0; v < v_count; ++v) t.levels[t.level[v]].push_back(v);

  for (int v = 0; v < v_count; ++v) {
    if (t.children[v].empty() && t.level[v] != depth) {
      throw NonUniformLeafDepth("leaf " + std::to_string(v) + " at depth " +
                                std::to_string(t.level[v]) + " but the deepest leaf is at " +
                                std::to_string(depth));
    }
  }
  return t;
}

VertexId closest_common_ancestor(const Tree& t, VertexId u, VertexId v) {
  require_known(t, u);
  require_known(t, v);
  while (t.level[u] > t.level[v]) u = t.parent[u];
  while (t.level[v] > t.level[u]) v = t.parent[v];
  while (u != v) {
    u = t.parent[u];
    v = t.parent[v];
  }
  return u;
}

std::vector<VertexId> shortest_path(const Tree& t, VertexId u, VertexId v) {
  const VertexId anc = closest_common_ancestor(t, u, v);
  std::vector<VertexId> path;
  for (VertexId x = u; x != anc; x = t.parent[x]) path.push_back(x);
  path.push_back(anc);
  std::vector<VertexId> tail;
  for (VertexId x = v; x != anc; x = t.parent[x]) tail.push_back(x);
  path.insert(path.end(), tail.rbegin(), tail.rend());
  return path;
}

std::vector<VertexId> descendant_leaves(const Tree& t, VertexId g) {
  require_known(t, g);
  std::vector<VertexId> out;
  std::vector<VertexId> stack{g};
  while (!stack.empty()) {
    const VertexId x = stack.back();
    stack.pop_back();
    if (t.is_leaf(x)) {
      out.push_back(x);
      continue;
    }
    // Push children in reverse so leaves come out in ascending order.
    for (auto it = t.children[x].rbegin(); it != t.children[x].rend(); ++it) stack.push_back(*it);
  }
  return out;
}

}  // namespace treegls
