#ifndef HIGEN_HIERARCHY_HPP
#define HIGEN_HIERARCHY_HPP

#include <string>
#include <vector>

#include "higen/graph.hpp"

namespace higen {

/// A hierarchical graph: levels[0] is the single-node root, levels[L] the
/// data graph. Level l-1 is the coarsening of level l by the parent map.
/// Immutable after construction; safe to share across threads read-only.
class HierarchicalGraph {
 public:
  /// Builds an HG by coarsening `leaf` bottom-up through partition_stack.
  /// partition_stack[0] applies to the leaf; the final coarsening must
  /// produce a single node.
  static HierarchicalGraph build(const LevelGraph& leaf,
                                 const std::vector<std::vector<int>>& partition_stack);

  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  const LevelGraph& level(int l) const { return levels_[static_cast<std::size_t>(l)]; }
  const LevelGraph& leaf() const { return levels_.back(); }
  Weight total_weight() const { return levels_.back().total_weight(); }

  /// Parent map for level l >= 1: node id at level l -> node id at l-1.
  const std::vector<int>& parent_map(int l) const {
    return parent_maps_[static_cast<std::size_t>(l) - 1];
  }

  /// Communities of level l >= 1, indexed by parent node id, each listed in
  /// weighted-BFS order.
  const std::vector<std::vector<NodeId>>& community_orders(int l) const {
    return orders_[static_cast<std::size_t>(l) - 1];
  }

  CommunityView community(int l, NodeId parent) const;
  BipartiteView bipartite(int l, NodeId parent_u, NodeId parent_v) const;

  /// Checks weight conservation and parent consistency at every level;
  /// throws std::logic_error on violation.
  void validate() const;

  /// Structured JSON document {levels:[{n, edges:[[u,v,w]]}], parents:[[..]]}.
  std::string to_json() const;
  static HierarchicalGraph from_json(const std::string& text);

 private:
  HierarchicalGraph() = default;
  void compute_orders();

  std::vector<LevelGraph> levels_;              // index 0 = root
  std::vector<std::vector<int>> parent_maps_;   // per level 1..L
  std::vector<std::vector<std::vector<NodeId>>> orders_;  // per level 1..L
};

}  // namespace higen

#endif  // HIGEN_HIERARCHY_HPP
