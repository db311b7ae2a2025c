#include "higen/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "higen/rng.hpp"

namespace higen {

int cluster_count(const std::vector<int>& assignment) {
  int c = 0;
  for (int a : assignment) c = std::max(c, a + 1);
  return c;
}

double modularity(const LevelGraph& g, const std::vector<int>& assignment) {
  if (g.total_weight() == 0) throw std::invalid_argument("modularity of zero-edge graph");
  if (static_cast<int>(assignment.size()) != g.node_count())
    throw std::invalid_argument("assignment does not cover all nodes");

  const int k = cluster_count(assignment);
  std::vector<Weight> internal(static_cast<std::size_t>(k), 0);
  std::vector<Weight> degree(static_cast<std::size_t>(k), 0);
  for (const Edge& e : g.edges()) {
    if (assignment[static_cast<std::size_t>(e.u)] == assignment[static_cast<std::size_t>(e.v)])
      internal[static_cast<std::size_t>(assignment[static_cast<std::size_t>(e.u)])] += e.w;
  }
  for (NodeId v = 0; v < g.node_count(); ++v)
    degree[static_cast<std::size_t>(assignment[static_cast<std::size_t>(v)])] +=
        g.modularity_degree(v);

  const double m = static_cast<double>(g.total_weight());
  double q = 0.0;
  for (int c = 0; c < k; ++c) {
    const double tot = static_cast<double>(degree[static_cast<std::size_t>(c)]) / (2.0 * m);
    q += static_cast<double>(internal[static_cast<std::size_t>(c)]) / m - tot * tot;
  }
  return q;
}

namespace {

std::vector<int> renumber_contiguous(std::vector<int> assignment) {
  std::vector<int> remap(assignment.size(), -1);
  int next = 0;
  for (int& a : assignment) {
    if (remap[static_cast<std::size_t>(a)] < 0) remap[static_cast<std::size_t>(a)] = next++;
    a = remap[static_cast<std::size_t>(a)];
  }
  return assignment;
}

/// One local-move phase. Returns the node->community assignment (contiguous)
/// and whether any node moved.
std::pair<std::vector<int>, bool> local_move_phase(const LevelGraph& g, Rng& rng) {
  const int n = g.node_count();
  const double m = static_cast<double>(g.total_weight());

  std::vector<int> comm(static_cast<std::size_t>(n));
  std::iota(comm.begin(), comm.end(), 0);
  std::vector<double> comm_degree(static_cast<std::size_t>(n), 0.0);
  for (NodeId v = 0; v < n; ++v)
    comm_degree[static_cast<std::size_t>(v)] = static_cast<double>(g.modularity_degree(v));

  std::vector<NodeId> sweep(static_cast<std::size_t>(n));
  std::iota(sweep.begin(), sweep.end(), 0);

  std::vector<double> link_to(static_cast<std::size_t>(n), 0.0);
  bool any_move = false;
  bool moved = true;
  constexpr double kGainEps = 1e-12;

  while (moved) {
    moved = false;
    rng.shuffle(sweep);
    for (NodeId v : sweep) {
      const int old_comm = comm[static_cast<std::size_t>(v)];
      const double k_v = static_cast<double>(g.modularity_degree(v));

      std::vector<int> touched;
      for (auto [u, w] : g.neighbors(v)) {
        const int c = comm[static_cast<std::size_t>(u)];
        if (link_to[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
        link_to[static_cast<std::size_t>(c)] += static_cast<double>(w);
      }

      comm_degree[static_cast<std::size_t>(old_comm)] -= k_v;
      auto gain = [&](int c) {
        return link_to[static_cast<std::size_t>(c)] / m -
               comm_degree[static_cast<std::size_t>(c)] * k_v / (2.0 * m * m);
      };

      int best = old_comm;
      double best_gain = gain(old_comm);
      std::sort(touched.begin(), touched.end());
      for (int c : touched) {
        if (c == old_comm) continue;
        const double gn = gain(c);
        if (gn > best_gain + kGainEps) {
          best = c;
          best_gain = gn;
        }
      }

      comm[static_cast<std::size_t>(v)] = best;
      comm_degree[static_cast<std::size_t>(best)] += k_v;
      if (best != old_comm) {
        moved = true;
        any_move = true;
      }
      for (int c : touched) link_to[static_cast<std::size_t>(c)] = 0.0;
    }
  }
  return {renumber_contiguous(std::move(comm)), any_move};
}

}  // namespace

std::vector<PartitionResult> louvain(const LevelGraph& g, std::uint64_t seed) {
  if (g.total_weight() == 0) throw std::invalid_argument("louvain needs at least one edge");

  Rng rng(seed);
  std::vector<PartitionResult> results;
  LevelGraph work = g;
  std::vector<int> composed(static_cast<std::size_t>(g.node_count()));
  std::iota(composed.begin(), composed.end(), 0);

  for (int pass = 1;; ++pass) {
    Rng pass_rng = rng.substream({0x10afa1u, static_cast<std::uint64_t>(pass)});
    auto [local, any_move] = local_move_phase(work, pass_rng);
    if (!any_move && !results.empty()) break;

    std::vector<int> next(composed.size());
    for (std::size_t v = 0; v < composed.size(); ++v)
      next[v] = local[static_cast<std::size_t>(composed[v])];
    composed = std::move(next);
    results.push_back({composed, modularity(g, composed), pass});

    if (!any_move) break;  // first pass already stable
    const int clusters = cluster_count(local);
    if (clusters == work.node_count() || clusters == 1) break;
    work = coarsen(work, local);
  }
  return results;
}

std::vector<std::vector<int>> build_partition_stack(const LevelGraph& g, int depth,
                                                    std::uint64_t seed) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  const int n = g.node_count();

  // Composed Louvain assignments, finest to coarsest, strictly coarsening,
  // each with at least 2 clusters.
  std::vector<PartitionResult> passes = louvain(g, seed);
  std::vector<std::vector<int>> chain;
  for (const PartitionResult& r : passes) {
    const int c = cluster_count(r.assignment);
    if (c >= 2 && (chain.empty() || c < cluster_count(chain.back())))
      chain.push_back(r.assignment);
  }

  std::vector<std::vector<int>> kept;  // assignments on leaf nodes, finest first
  if (depth == 2) {
    if (!chain.empty()) kept.push_back(chain.back());
  } else if (depth >= 3) {
    // The Louvain level two above the leaf, when distinct from the coarsest.
    std::vector<const std::vector<int>*> picks;
    if (passes.size() >= 2 && cluster_count(passes[1].assignment) >= 2)
      picks.push_back(&passes[1].assignment);
    if (!chain.empty() &&
        (picks.empty() || cluster_count(chain.back()) < cluster_count(*picks.front())))
      picks.push_back(&chain.back());
    for (const auto* p : picks) kept.push_back(*p);
    while (static_cast<int>(kept.size()) > depth - 1) kept.erase(kept.begin());
  }

  // Convert nested leaf-level assignments into per-level coarsening steps.
  std::vector<std::vector<int>> stack;
  std::vector<int> prev(static_cast<std::size_t>(n));
  std::iota(prev.begin(), prev.end(), 0);
  int prev_clusters = n;
  for (const std::vector<int>& a : kept) {
    std::vector<int> step(static_cast<std::size_t>(prev_clusters), -1);
    for (int v = 0; v < n; ++v) {
      int& slot = step[static_cast<std::size_t>(prev[static_cast<std::size_t>(v)])];
      if (slot >= 0 && slot != a[static_cast<std::size_t>(v)])
        throw std::logic_error("louvain passes are not nested");
      slot = a[static_cast<std::size_t>(v)];
    }
    stack.push_back(step);
    prev = a;
    prev_clusters = cluster_count(a);
  }

  // Pad with identity partitions just below the root.
  while (static_cast<int>(stack.size()) < depth - 1) {
    std::vector<int> identity(static_cast<std::size_t>(prev_clusters));
    std::iota(identity.begin(), identity.end(), 0);
    stack.push_back(identity);
  }
  stack.push_back(std::vector<int>(static_cast<std::size_t>(prev_clusters), 0));
  return stack;
}

}  // namespace higen
