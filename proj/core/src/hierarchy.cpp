#include "higen/hierarchy.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace higen {

HierarchicalGraph HierarchicalGraph::build(
    const LevelGraph& leaf, const std::vector<std::vector<int>>& partition_stack) {
  HierarchicalGraph hg;
  const int depth = static_cast<int>(partition_stack.size());

  std::vector<LevelGraph> bottom_up;
  bottom_up.push_back(leaf);
  bottom_up.back().set_level_index(depth);
  for (int i = 0; i < depth; ++i) {
    bottom_up.push_back(coarsen(bottom_up.back(), partition_stack[static_cast<std::size_t>(i)]));
  }
  if (bottom_up.back().node_count() != 1)
    throw std::invalid_argument("partition stack does not reduce to a single node");

  hg.levels_.assign(bottom_up.rbegin(), bottom_up.rend());
  for (int l = 0; l <= depth; ++l)
    hg.levels_[static_cast<std::size_t>(l)].set_level_index(l);

  hg.parent_maps_.assign(partition_stack.rbegin(), partition_stack.rend());
  hg.compute_orders();
  hg.validate();
  return hg;
}

void HierarchicalGraph::compute_orders() {
  orders_.clear();
  for (int l = 1; l <= depth(); ++l) {
    const LevelGraph& g = levels_[static_cast<std::size_t>(l)];
    const std::vector<int>& parents = parent_map(l);
    const int parent_count = levels_[static_cast<std::size_t>(l) - 1].node_count();

    std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(parent_count));
    for (NodeId v = 0; v < g.node_count(); ++v)
      members[static_cast<std::size_t>(parents[static_cast<std::size_t>(v)])].push_back(v);

    std::vector<std::vector<NodeId>> level_orders;
    level_orders.reserve(static_cast<std::size_t>(parent_count));
    for (NodeId p = 0; p < parent_count; ++p) {
      CommunityView c = {l, p, l == depth(), members[static_cast<std::size_t>(p)], {}};
      for (const Edge& e : g.edges()) {
        if (parents[static_cast<std::size_t>(e.u)] == p &&
            parents[static_cast<std::size_t>(e.v)] == p)
          c.internal_edges.push_back(e);
      }
      level_orders.push_back(bfs_order_community(c));
    }
    orders_.push_back(std::move(level_orders));
  }
}

CommunityView HierarchicalGraph::community(int l, NodeId parent) const {
  const LevelGraph& g = levels_[static_cast<std::size_t>(l)];
  const std::vector<int>& parents = parent_map(l);
  CommunityView c = {l, parent, l == depth(), community_orders(l)[static_cast<std::size_t>(parent)], {}};
  for (const Edge& e : g.edges()) {
    if (parents[static_cast<std::size_t>(e.u)] == parent &&
        parents[static_cast<std::size_t>(e.v)] == parent)
      c.internal_edges.push_back(e);
  }
  return c;
}

BipartiteView HierarchicalGraph::bipartite(int l, NodeId parent_u, NodeId parent_v) const {
  if (parent_u > parent_v) std::swap(parent_u, parent_v);
  if (parent_u == parent_v) throw std::invalid_argument("bipartite needs distinct parents");
  const LevelGraph& g = levels_[static_cast<std::size_t>(l)];
  const std::vector<int>& parents = parent_map(l);
  BipartiteView b;
  b.level = l;
  b.parent_u = parent_u;
  b.parent_v = parent_v;
  b.left = community_orders(l)[static_cast<std::size_t>(parent_u)];
  b.right = community_orders(l)[static_cast<std::size_t>(parent_v)];
  for (const Edge& e : g.edges()) {
    const int pu = parents[static_cast<std::size_t>(e.u)];
    const int pv = parents[static_cast<std::size_t>(e.v)];
    if ((pu == parent_u && pv == parent_v) || (pu == parent_v && pv == parent_u))
      b.cross_edges.push_back(e);
  }
  return b;
}

void HierarchicalGraph::validate() const {
  if (levels_.empty()) throw std::logic_error("empty hierarchy");
  const LevelGraph& root = levels_.front();
  if (root.node_count() != 1) throw std::logic_error("root must have one node");
  if (root.edge_count() != 1 || root.self_loop(0) != root.total_weight())
    throw std::logic_error("root must be a single self-loop");

  const Weight w0 = root.total_weight();
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    if (levels_[l].total_weight() != w0)
      throw std::logic_error("weight conservation violated");
    levels_[l].validate(depth() >= 1 && l + 1 == levels_.size());
  }
  for (int l = 1; l <= depth(); ++l) {
    const LevelGraph recoarsened = coarsen(levels_[static_cast<std::size_t>(l)], parent_map(l));
    const LevelGraph& expected = levels_[static_cast<std::size_t>(l) - 1];
    if (recoarsened.node_count() != expected.node_count() ||
        recoarsened.edge_count() != expected.edge_count())
      throw std::logic_error("parent consistency violated");
    for (const Edge& e : expected.edges())
      if (recoarsened.weight(e.u, e.v) != e.w)
        throw std::logic_error("parent consistency violated");
  }
}

std::string HierarchicalGraph::to_json() const {
  nlohmann::json doc;
  doc["levels"] = nlohmann::json::array();
  for (const LevelGraph& g : levels_) {
    nlohmann::json jl;
    jl["n"] = g.node_count();
    jl["edges"] = nlohmann::json::array();
    for (const Edge& e : g.edges()) jl["edges"].push_back({e.u, e.v, e.w});
    doc["levels"].push_back(std::move(jl));
  }
  doc["parents"] = parent_maps_;
  return doc.dump();
}

HierarchicalGraph HierarchicalGraph::from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  const auto& jlevels = doc.at("levels");
  if (jlevels.empty()) throw std::invalid_argument("hierarchy document has no levels");

  const auto& jleaf = jlevels.back();
  LevelGraph leaf(static_cast<int>(jlevels.size()) - 1, jleaf.at("n").get<int>());
  for (const auto& je : jleaf.at("edges"))
    leaf.add_edge(je.at(0).get<NodeId>(), je.at(1).get<NodeId>(), je.at(2).get<Weight>());

  std::vector<std::vector<int>> parents = doc.at("parents").get<std::vector<std::vector<int>>>();
  // Stored top-down (level 1..L); build() wants bottom-up.
  std::vector<std::vector<int>> stack(parents.rbegin(), parents.rend());
  HierarchicalGraph hg = build(leaf, stack);

  // The serialized intermediate levels must match what build() reproduces.
  for (std::size_t l = 0; l + 1 < jlevels.size(); ++l) {
    const LevelGraph& g = hg.levels_[l];
    if (jlevels[l].at("n").get<int>() != g.node_count() ||
        jlevels[l].at("edges").size() != g.edge_count())
      throw std::invalid_argument("hierarchy document inconsistent with parent maps");
    for (const auto& je : jlevels[l].at("edges"))
      if (g.weight(je.at(0).get<NodeId>(), je.at(1).get<NodeId>()) != je.at(2).get<Weight>())
        throw std::invalid_argument("hierarchy document inconsistent with parent maps");
  }
  return hg;
}

}  // namespace higen
