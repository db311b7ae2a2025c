#ifndef HIGEN_ENCODER_HPP
#define HIGEN_ENCODER_HPP

#include <string>
#include <vector>

#include "higen/autodiff.hpp"
#include "higen/graph.hpp"
#include "higen/nn.hpp"

namespace higen::enc {

using ad::Mat;
using ad::Var;

struct EncoderConfig {
  int hidden = 64;
  int rounds = 8;
  int k_eig = 8;
  int k_rw = 8;

  int feature_dim() const { return 2 + k_eig + k_rw; }
};

/// Per-node structural/positional inputs: [normalized weighted degree,
/// normalized self-loop weight, k_eig Laplacian eigenvector entries for the
/// smallest non-zero eigenvalues (sign: first non-zero entry positive),
/// random-walk return probabilities for steps 1..k_rw]. Rows of isolated
/// nodes are zero except where stated.
Mat structural_encodings(const LevelGraph& g, int k_eig, int k_rw);

/// Edge of a partially generated graph. Candidate edges are the positions
/// whose weights are about to be predicted; they carry weight 0 and a flag.
struct AugEdge {
  int u = 0;
  int v = 0;
  Weight w = 0;
  bool candidate = false;
};

/// A generated-so-far graph plus candidate edges, the unit every encoder
/// forward consumes.
struct AugGraph {
  int n = 0;
  std::vector<AugEdge> edges;
  Mat features;  // n x feature_dim structural inputs for the real subgraph

  /// Builds `features` from the real (non-candidate) edges.
  void compute_features(int k_eig, int k_rw);
};

/// Attentive-message MPNN: per round, gated messages over real+candidate
/// edges followed by a GRU-style state update. Used for community AR steps.
Var encode_mpnn(nn::Workspace& ws, const std::string& prefix, const AugGraph& g,
                const Var& context_rows, const EncoderConfig& cfg);

/// MPNN rounds interleaved with one masked global-attention layer per block.
/// attn_mask(i,j) != 0 marks pairs allowed to attend; masked positions get
/// exactly zero attention weight. Used for parent graphs and
/// bipartite-augmented level graphs.
Var encode_mpnn_attention(nn::Workspace& ws, const std::string& prefix, const AugGraph& g,
                          const Var& context_rows, const Mat& attn_mask,
                          const EncoderConfig& cfg);

}  // namespace higen::enc

#endif  // HIGEN_ENCODER_HPP
