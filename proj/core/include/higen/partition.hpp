#ifndef HIGEN_PARTITION_HPP
#define HIGEN_PARTITION_HPP

#include <cstdint>
#include <vector>

#include "higen/graph.hpp"

namespace higen {

struct PartitionResult {
  std::vector<int> assignment;  // node -> cluster id, contiguous from 0
  double modularity = 0.0;
  int pass_count = 0;
};

/// Newman modularity Q = sum_c [ S_in/m - (S_tot/2m)^2 ] on the weighted
/// graph. Self-loops count once in S_in and twice in the degree. Throws on
/// zero-edge graphs.
double modularity(const LevelGraph& g, const std::vector<int>& assignment);

/// Louvain community detection. Returns one result per pass, each with the
/// assignment composed down to g's nodes. The node sweep order inside the
/// local-move phase is randomized by `seed`; only strictly positive
/// modularity gains are accepted, so pass modularities are non-decreasing.
std::vector<PartitionResult> louvain(const LevelGraph& g, std::uint64_t seed);

/// Bottom-up assignment stack of length `depth` for build_hg: Louvain levels
/// spliced to a uniform hierarchy. depth=2 keeps the coarsest non-trivial
/// partition; depth=3 also keeps the Louvain level two above the leaf when
/// available. Missing levels are padded with identity partitions just below
/// the root.
std::vector<std::vector<int>> build_partition_stack(const LevelGraph& g, int depth,
                                                    std::uint64_t seed);

int cluster_count(const std::vector<int>& assignment);

}  // namespace higen

#endif  // HIGEN_PARTITION_HPP
