#ifndef HIGEN_GRAPH_HPP
#define HIGEN_GRAPH_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace higen {

using NodeId = int;
using Weight = std::int64_t;

/// Undirected edge stored canonically with u <= v. A self-loop (u == v)
/// encodes the internal weight of the community a node aggregates.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  Weight w = 0;
};

/// Integer-weighted undirected graph at one abstraction level of a
/// hierarchical graph. Weights are exact integers; all aggregate sums must
/// conserve exactly.
class LevelGraph {
 public:
  LevelGraph() = default;
  LevelGraph(int level_index, int node_count);

  /// Adds weight w to edge (u,v), creating it if absent. w must be >= 1.
  void add_edge(NodeId u, NodeId v, Weight w);

  /// Weight of edge (u,v), 0 if absent.
  Weight weight(NodeId u, NodeId v) const;

  const std::vector<Edge>& edges() const { return edges_; }
  int node_count() const { return node_count_; }
  int level_index() const { return level_index_; }
  void set_level_index(int level) { level_index_ = level; }

  Weight total_weight() const { return total_weight_; }
  Weight self_loop(NodeId u) const;

  /// Sum of incident non-self edge weights.
  Weight strength(NodeId u) const { return strength_[static_cast<std::size_t>(u)]; }

  /// Degree used by modularity: strength + 2 * self-loop weight.
  Weight modularity_degree(NodeId u) const {
    return strength(u) + 2 * self_loop(u);
  }

  /// Non-self neighbors of u with edge weights.
  const std::vector<std::pair<NodeId, Weight>>& neighbors(NodeId u) const {
    return adjacency_[static_cast<std::size_t>(u)];
  }

  std::size_t edge_count() const { return edges_.size(); }
  bool has_self_loops() const { return self_loop_count_ > 0; }

  /// True when every weight is 1 and there are no self-loops (the form
  /// dataset graphs take at the leaf level).
  bool is_simple() const;

  /// Checks structural invariants; throws std::logic_error on violation.
  void validate(bool leaf) const;

 private:
  static std::uint64_t key(NodeId u, NodeId v) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
  }

  int level_index_ = 0;
  int node_count_ = 0;
  Weight total_weight_ = 0;
  std::size_t self_loop_count_ = 0;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> edge_index_;
  std::vector<std::vector<std::pair<NodeId, Weight>>> adjacency_;
  std::vector<Weight> strength_;
  std::vector<Weight> self_loop_;
};

/// One community at level `level`: the level-l nodes that share a parent
/// node, together with the edges internal to the group.
struct CommunityView {
  int level = 0;
  NodeId parent = 0;
  bool leaf_level = false;
  std::vector<NodeId> members;   // level-l node ids
  std::vector<Edge> internal_edges;
};

/// Cross edges between two communities whose parents are joined by the
/// parent edge (parent_u, parent_v), parent_u < parent_v.
struct BipartiteView {
  int level = 0;
  NodeId parent_u = 0;
  NodeId parent_v = 0;
  std::vector<NodeId> left;      // members of community parent_u
  std::vector<NodeId> right;     // members of community parent_v
  std::vector<Edge> cross_edges;
};

/// Aggregates g by the given node->cluster assignment: one output node per
/// cluster, self-loop weight = total internal weight, cross weights summed.
/// Cluster ids must be contiguous from 0.
LevelGraph coarsen(const LevelGraph& g, const std::vector<int>& assignment);

/// Weighted-BFS node order for a community. The first node maximizes
/// (weighted degree + self-loop weight); the frontier is re-sorted every
/// step by (weight to already-placed nodes + self-loop weight). Ties break
/// on the smallest original id. Disconnected communities are ordered
/// component by component, largest first.
std::vector<NodeId> bfs_order_community(const CommunityView& c);

/// Candidate edges for AR step t, as (row, col) positions in the community
/// order: (t, j) for j < t, plus (t, t) at non-leaf levels. t = 0 is only
/// valid at non-leaf levels (self-edge only).
std::vector<std::pair<int, int>> candidate_edges_at_step(const CommunityView& c,
                                                         int t);

}  // namespace higen

#endif  // HIGEN_GRAPH_HPP
