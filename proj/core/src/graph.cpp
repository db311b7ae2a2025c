#include "higen/graph.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace higen {

LevelGraph::LevelGraph(int level_index, int node_count)
    : level_index_(level_index), node_count_(node_count) {
  if (node_count < 0) throw std::invalid_argument("negative node count");
  adjacency_.resize(static_cast<std::size_t>(node_count));
  strength_.assign(static_cast<std::size_t>(node_count), 0);
  self_loop_.assign(static_cast<std::size_t>(node_count), 0);
}

void LevelGraph::add_edge(NodeId u, NodeId v, Weight w) {
  if (u < 0 || v < 0 || u >= node_count_ || v >= node_count_)
    throw std::invalid_argument("edge endpoint out of range");
  if (w < 1) throw std::invalid_argument("edge weight must be >= 1");
  if (u > v) std::swap(u, v);

  auto [it, inserted] = edge_index_.try_emplace(key(u, v), edges_.size());
  if (inserted) {
    edges_.push_back({u, v, w});
    if (u == v) ++self_loop_count_;
  } else {
    edges_[it->second].w += w;
  }
  total_weight_ += w;
  if (u == v) {
    self_loop_[static_cast<std::size_t>(u)] += w;
  } else {
    strength_[static_cast<std::size_t>(u)] += w;
    strength_[static_cast<std::size_t>(v)] += w;
    if (inserted) {
      adjacency_[static_cast<std::size_t>(u)].push_back({v, w});
      adjacency_[static_cast<std::size_t>(v)].push_back({u, w});
    } else {
      for (auto& [n, wt] : adjacency_[static_cast<std::size_t>(u)])
        if (n == v) wt = edges_[it->second].w;
      for (auto& [n, wt] : adjacency_[static_cast<std::size_t>(v)])
        if (n == u) wt = edges_[it->second].w;
    }
  }
}

Weight LevelGraph::weight(NodeId u, NodeId v) const {
  if (u > v) std::swap(u, v);
  auto it = edge_index_.find(key(u, v));
  return it == edge_index_.end() ? 0 : edges_[it->second].w;
}

Weight LevelGraph::self_loop(NodeId u) const {
  return self_loop_[static_cast<std::size_t>(u)];
}

bool LevelGraph::is_simple() const {
  if (self_loop_count_ > 0) return false;
  for (const Edge& e : edges_)
    if (e.w != 1) return false;
  return true;
}

void LevelGraph::validate(bool leaf) const {
  for (const Edge& e : edges_) {
    if (e.w < 1) throw std::logic_error("edge weight below 1");
    if (e.u > e.v) throw std::logic_error("edge not canonical");
    if (e.v >= node_count_) throw std::logic_error("edge endpoint out of range");
    if (leaf && e.u == e.v) throw std::logic_error("self-loop at leaf level");
    if (leaf && e.w != 1) throw std::logic_error("non-unit weight at leaf level");
  }
}

LevelGraph coarsen(const LevelGraph& g, const std::vector<int>& assignment) {
  if (static_cast<int>(assignment.size()) != g.node_count())
    throw std::invalid_argument("assignment does not cover all nodes");

  int cluster_count = 0;
  for (int c : assignment) {
    if (c < 0) throw std::invalid_argument("invalid partition: negative cluster id");
    cluster_count = std::max(cluster_count, c + 1);
  }
  std::vector<bool> seen(static_cast<std::size_t>(cluster_count), false);
  for (int c : assignment) seen[static_cast<std::size_t>(c)] = true;
  for (bool s : seen)
    if (!s) throw std::invalid_argument("invalid partition: cluster ids not contiguous");

  LevelGraph out(g.level_index() - 1, cluster_count);
  // Accumulate before inserting so each coarse edge is added once.
  std::map<std::pair<NodeId, NodeId>, Weight> agg;
  for (const Edge& e : g.edges()) {
    NodeId cu = assignment[static_cast<std::size_t>(e.u)];
    NodeId cv = assignment[static_cast<std::size_t>(e.v)];
    if (cu > cv) std::swap(cu, cv);
    agg[{cu, cv}] += e.w;
  }
  for (const auto& [key, w] : agg) out.add_edge(key.first, key.second, w);

  if (out.total_weight() != g.total_weight())
    throw std::logic_error("coarsen lost weight");
  return out;
}

namespace {

struct LocalAdj {
  std::vector<NodeId> nodes;                       // sorted member ids
  std::unordered_map<NodeId, int> index;           // id -> local position
  std::vector<std::vector<std::pair<int, Weight>>> nbrs;  // local, non-self
  std::vector<Weight> self;
  std::vector<Weight> strength;

  explicit LocalAdj(const CommunityView& c) {
    nodes = c.members;
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      index[nodes[i]] = static_cast<int>(i);
    nbrs.resize(nodes.size());
    self.assign(nodes.size(), 0);
    strength.assign(nodes.size(), 0);
    for (const Edge& e : c.internal_edges) {
      int a = index.at(e.u), b = index.at(e.v);
      if (a == b) {
        self[static_cast<std::size_t>(a)] += e.w;
      } else {
        nbrs[static_cast<std::size_t>(a)].push_back({b, e.w});
        nbrs[static_cast<std::size_t>(b)].push_back({a, e.w});
        strength[static_cast<std::size_t>(a)] += e.w;
        strength[static_cast<std::size_t>(b)] += e.w;
      }
    }
  }
};

}  // namespace

std::vector<NodeId> bfs_order_community(const CommunityView& c) {
  if (c.members.empty()) throw std::invalid_argument("empty community");

  LocalAdj adj(c);
  const int n = static_cast<int>(adj.nodes.size());

  // Connected components over non-self edges.
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int comp_count = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    std::vector<int> stack{s};
    comp[static_cast<std::size_t>(s)] = comp_count;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (auto [y, w] : adj.nbrs[static_cast<std::size_t>(x)]) {
        (void)w;
        if (comp[static_cast<std::size_t>(y)] < 0) {
          comp[static_cast<std::size_t>(y)] = comp_count;
          stack.push_back(y);
        }
      }
    }
    ++comp_count;
  }
  std::vector<std::vector<int>> comps(static_cast<std::size_t>(comp_count));
  for (int i = 0; i < n; ++i)
    comps[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])].push_back(i);
  // Largest component first; ties by smallest member id (members are sorted,
  // so front() is the minimum).
  std::sort(comps.begin(), comps.end(), [&](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return adj.nodes[static_cast<std::size_t>(a.front())] <
           adj.nodes[static_cast<std::size_t>(b.front())];
  });

  std::vector<NodeId> order;
  order.reserve(static_cast<std::size_t>(n));
  std::vector<bool> placed(static_cast<std::size_t>(n), false);
  std::vector<Weight> key(static_cast<std::size_t>(n), 0);  // weight to placed + self

  for (const auto& members : comps) {
    // Seed: maximum (weighted degree + self-loop), ties smallest id.
    int best = -1;
    Weight best_key = 0;
    for (int x : members) {
      const Weight k = adj.strength[static_cast<std::size_t>(x)] +
                       adj.self[static_cast<std::size_t>(x)];
      if (best < 0 || k > best_key ||
          (k == best_key && adj.nodes[static_cast<std::size_t>(x)] <
                                adj.nodes[static_cast<std::size_t>(best)])) {
        best = x;
        best_key = k;
      }
    }

    std::vector<int> frontier;
    std::vector<bool> in_frontier(static_cast<std::size_t>(n), false);
    auto place = [&](int x) {
      placed[static_cast<std::size_t>(x)] = true;
      order.push_back(adj.nodes[static_cast<std::size_t>(x)]);
      for (auto [y, w] : adj.nbrs[static_cast<std::size_t>(x)]) {
        if (placed[static_cast<std::size_t>(y)]) continue;
        key[static_cast<std::size_t>(y)] += w;
        if (!in_frontier[static_cast<std::size_t>(y)]) {
          in_frontier[static_cast<std::size_t>(y)] = true;
          frontier.push_back(y);
        }
      }
    };

    place(best);
    while (!frontier.empty()) {
      int pick = -1;
      for (int x : frontier) {
        if (pick < 0) {
          pick = x;
          continue;
        }
        const Weight kx = key[static_cast<std::size_t>(x)] + adj.self[static_cast<std::size_t>(x)];
        const Weight kp = key[static_cast<std::size_t>(pick)] + adj.self[static_cast<std::size_t>(pick)];
        if (kx > kp || (kx == kp && adj.nodes[static_cast<std::size_t>(x)] <
                                        adj.nodes[static_cast<std::size_t>(pick)]))
          pick = x;
      }
      frontier.erase(std::find(frontier.begin(), frontier.end(), pick));
      in_frontier[static_cast<std::size_t>(pick)] = false;
      place(pick);
    }
  }
  return order;
}

std::vector<std::pair<int, int>> candidate_edges_at_step(const CommunityView& c,
                                                         int t) {
  const int n = static_cast<int>(c.members.size());
  if (t < 0 || t >= n) throw std::invalid_argument("step index out of range");
  if (c.leaf_level && t == 0)
    throw std::invalid_argument("leaf step 0 has no candidate edges");
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(t) + 1);
  for (int j = 0; j < t; ++j) out.push_back({t, j});
  if (!c.leaf_level) out.push_back({t, t});
  return out;
}

}  // namespace higen
