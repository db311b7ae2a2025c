#ifndef HIGEN_MODEL_HPP
#define HIGEN_MODEL_HPP

#include <string>
#include <vector>

#include "higen/encoder.hpp"
#include "higen/graph.hpp"
#include "higen/heads.hpp"
#include "higen/hierarchy.hpp"
#include "higen/nn.hpp"
#include "higen/rng.hpp"

namespace higen {

enum class Variant { higen_m, higen_bernoulli };
enum class BipartiteMode { joint, sequential };

struct ModelConfig {
  int levels = 2;      // hierarchy depth L
  int hidden_dim = 64;
  int layers = 8;
  int k_eig = 8;
  int k_rw = 8;
  int mixtures = 20;
  Variant variant = Variant::higen_m;
  // Lambda activation for leaf-level rows under higen-m; the bernoulli
  // variant always uses sigmoid at the leaf.
  heads::Activation leaf_activation = heads::Activation::multihot;

  enc::EncoderConfig encoder() const { return {hidden_dim, layers, k_eig, k_rw}; }
  heads::Activation lambda_activation(int level) const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

/// Empirical root distribution: the multiset of training w0 values (node
/// counts recorded alongside for diagnostics).
struct RootDistribution {
  std::vector<Weight> weights;
  std::vector<int> node_counts;

  bool fitted() const { return !weights.empty(); }
  Weight sample(Rng& rng) const;
  double logpmf(Weight w0) const;
};

/// Per-level GNNs, output heads and the root distribution, together with
/// everything needed to checkpoint them.
class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  RootDistribution& root() { return root_; }
  const RootDistribution& root() const { return root_; }

  /// Cap applied to generated community sizes; fitted to 2x the largest
  /// training community.
  int community_cap() const { return community_cap_; }
  void set_community_cap(int cap) { community_cap_ = cap; }

  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  ModelConfig cfg_;
  nn::ParamStore params_;
  RootDistribution root_;
  int community_cap_ = 0;  // 0 = unlimited
};

// ---------------------------------------------------------------------------
// Forward assembly shared by training (teacher forcing) and generation.

/// Lower-triangular weights of a community being generated or replayed:
/// tri[t][j] for j < t plus tri[t][t] (self) at non-leaf levels.
struct CommunityRows {
  bool leaf = false;
  std::vector<std::vector<Weight>> tri;

  int size() const { return static_cast<int>(tri.size()); }
  Weight row_sum(int t) const;
  Weight total() const;
};

/// Extracts teacher rows for a community from its HG view and BFS order.
CommunityRows teacher_rows(const HierarchicalGraph& hg, int level, NodeId parent);

/// Augmented community graph at step t: placed nodes 0..t-1 with their rows,
/// node t with candidate edges flagged.
enc::AugGraph community_step_graph(const CommunityRows& rows, int t,
                                   const enc::EncoderConfig& cfg);

/// Embeddings of a plain level graph by the level-l parent encoder
/// (attention unmasked).
ad::Var encode_parent_graph(nn::Workspace& ws, const Model& model,
                            const LevelGraph& g, int level);

/// Encoder + head for one community AR step.
heads::MixtureHead community_step_head(nn::Workspace& ws, const Model& model, int level,
                                       const CommunityRows& rows, int t,
                                       const ad::Var& parent_ctx,
                                       const std::vector<int>* candidate_perm = nullptr);

/// One bipartite to predict at a level: its parent edge and the candidate
/// node pairs (left-community order x right-community order).
struct BipartiteTask {
  NodeId parent_u = 0;
  NodeId parent_v = 0;
  std::vector<std::pair<NodeId, NodeId>> pairs;  // level-l node ids
};

/// The level-l graph as known when predicting bipartites: communities with
/// their intra edges, plus any already-generated cross edges.
struct LevelState {
  int node_count = 0;
  std::vector<std::vector<NodeId>> communities;  // ordered members per parent id
  std::vector<int> community_of;                 // node -> parent id
  std::vector<Edge> real_edges;
};

/// Encodes the bipartite-augmented level graph restricted to the communities
/// marked included, with attention masked to same-community or
/// parent-edge-joined pairs. Returns embeddings plus the global->local row
/// map (-1 for excluded nodes).
struct LevelEncoding {
  ad::Var embeds;
  std::vector<int> local_of;
};
LevelEncoding encode_level_graph(nn::Workspace& ws, const Model& model, int level,
                                 const LevelState& state,
                                 const std::vector<bool>& include_community,
                                 const std::vector<std::pair<NodeId, NodeId>>& candidates,
                                 const LevelGraph& parent_graph,
                                 const ad::Var& parent_embeds);

/// Head for one bipartite given level embeddings.
heads::MixtureHead bipartite_task_head(nn::Workspace& ws, const Model& model, int level,
                                       const BipartiteTask& task,
                                       const LevelEncoding& encoding,
                                       const ad::Var& parent_embeds);

std::vector<std::pair<NodeId, NodeId>> bipartite_candidate_pairs(
    const std::vector<NodeId>& left, const std::vector<NodeId>& right);

/// Parent edges in index order (sorted by canonical (u,v)).
std::vector<Edge> sorted_edges(const LevelGraph& g);

}  // namespace higen

#endif  // HIGEN_MODEL_HPP
