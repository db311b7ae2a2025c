#ifndef HIGEN_HEADS_HPP
#define HIGEN_HEADS_HPP

#include <string>
#include <vector>

#include "higen/autodiff.hpp"
#include "higen/graph.hpp"
#include "higen/nn.hpp"

namespace higen::heads {

/// Activation mapping K x E logits to edge-probability rows: softmax and
/// multihot produce simplex rows, bernoulli produces independent per-edge
/// probabilities in (0,1).
enum class Activation { softmax, multihot, bernoulli };

/// Mixture distribution parameters for one AR row or one bipartite.
struct MixtureHead {
  ad::Var beta;    // 1 x K, simplex
  ad::Var eta;     // 1 x K in (0,1); undefined for bipartite heads
  ad::Var lambda;  // K x E edge rows
};

ad::Var leaf_activation(const ad::Var& logits, Activation mode);

/// Community AR-row head: lambda from an edge-level MLP over
/// [edge_embed || pooled || parent], eta and beta from graph-level MLPs over
/// [pooled || parent].
MixtureHead community_row_head(nn::Workspace& ws, const std::string& prefix,
                               const ad::Var& edge_embeds, const ad::Var& pooled,
                               const ad::Var& parent_ctx, int mixtures,
                               Activation lambda_activation);

/// Bipartite head (no eta): theta from [edge_embed || parent_edge], beta
/// from [pool(edge_embeds) || parent_edge].
MixtureHead bipartite_head(nn::Workspace& ws, const std::string& prefix,
                           const ad::Var& edge_embeds, const ad::Var& parent_edge_ctx,
                           int mixtures, Activation lambda_activation);

/// log sum_k beta_k Bi(v | r, eta_k) Mu(u | v, lambda_k), v = sum(u).
ad::Var community_row_logpmf(const MixtureHead& head, const std::vector<Weight>& u,
                             Weight r);

/// log sum_k beta_k Mu(w | sum(w), lambda_k).
ad::Var bipartite_logpmf(const MixtureHead& head, const std::vector<Weight>& w);

/// log sum_k beta_k prod_e Bern(u_e | lambda_{k,e}) for binary rows
/// (bernoulli-leaf variant).
ad::Var bernoulli_row_logpmf(const MixtureHead& head, const std::vector<Weight>& u);

}  // namespace higen::heads

#endif  // HIGEN_HEADS_HPP
