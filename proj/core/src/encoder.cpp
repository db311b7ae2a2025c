#include "higen/encoder.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace higen::enc {

Mat structural_encodings(const LevelGraph& g, int k_eig, int k_rw) {
  const int n = g.node_count();
  if (n == 0) throw std::invalid_argument("empty graph");
  Mat out = Mat::Zero(n, 2 + k_eig + k_rw);

  Mat adj = Mat::Zero(n, n);
  for (const Edge& e : g.edges()) {
    if (e.u == e.v) {
      adj(e.u, e.u) += static_cast<double>(e.w);
    } else {
      adj(e.u, e.v) += static_cast<double>(e.w);
      adj(e.v, e.u) += static_cast<double>(e.w);
    }
  }
  Eigen::VectorXd deg = adj.rowwise().sum();

  double max_deg = 0.0, max_self = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    max_deg = std::max(max_deg, deg(v));
    max_self = std::max(max_self, static_cast<double>(g.self_loop(v)));
  }
  for (NodeId v = 0; v < n; ++v) {
    out(v, 0) = max_deg > 0.0 ? deg(v) / max_deg : 0.0;
    out(v, 1) = max_self > 0.0 ? static_cast<double>(g.self_loop(v)) / max_self : 0.0;
  }

  // Symmetric-normalized Laplacian; zero-degree rows are dropped from the
  // normalization and their feature entries zeroed below.
  if (k_eig > 0) {
    Eigen::VectorXd dinv_sqrt(n);
    for (int v = 0; v < n; ++v)
      dinv_sqrt(v) = deg(v) > 0.0 ? 1.0 / std::sqrt(deg(v)) : 0.0;
    Mat lap = Mat::Identity(n, n) -
              (dinv_sqrt.asDiagonal() * adj * dinv_sqrt.asDiagonal());
    Eigen::SelfAdjointEigenSolver<Mat> solver(lap);
    const Eigen::VectorXd& vals = solver.eigenvalues();
    const Mat& vecs = solver.eigenvectors();

    int written = 0;
    for (int i = 0; i < n && written < k_eig; ++i) {
      if (vals(i) <= 1e-9) continue;  // null space (one per component)
      Eigen::VectorXd vec = vecs.col(i);
      for (int v = 0; v < n; ++v) {
        if (std::abs(vec(v)) > 1e-9) {
          if (vec(v) < 0.0) vec = -vec;
          break;
        }
      }
      out.col(2 + written) = vec;
      ++written;
    }
  }

  if (k_rw > 0) {
    Mat walk = Mat::Zero(n, n);
    for (int v = 0; v < n; ++v)
      if (deg(v) > 0.0) walk.row(v) = adj.row(v) / deg(v);
    Mat power = walk;
    for (int s = 0; s < k_rw; ++s) {
      out.col(2 + k_eig + s) = power.diagonal();
      if (s + 1 < k_rw) power = power * walk;
    }
  }

  // Isolated nodes carry no structural signal.
  for (int v = 0; v < n; ++v)
    if (deg(v) == 0.0) out.row(v).segment(2, k_eig + k_rw).setZero();
  return out;
}

void AugGraph::compute_features(int k_eig, int k_rw) {
  LevelGraph real(0, n);
  for (const AugEdge& e : edges)
    if (!e.candidate) real.add_edge(e.u, e.v, e.w);
  features = structural_encodings(real, k_eig, k_rw);
}

namespace {

/// Directed edge expansion with 3 features per edge: [normalized weight,
/// candidate flag, self flag]. Undirected edges message both ways.
struct DirectedEdges {
  std::vector<int> src, dst;
  Mat feat;
};

DirectedEdges direct_edges(const AugGraph& g) {
  DirectedEdges d;
  double max_w = 0.0;
  for (const AugEdge& e : g.edges) max_w = std::max(max_w, static_cast<double>(e.w));
  std::vector<const AugEdge*> order;
  for (const AugEdge& e : g.edges) {
    d.src.push_back(e.u);
    d.dst.push_back(e.v);
    order.push_back(&e);
    if (e.u != e.v) {
      d.src.push_back(e.v);
      d.dst.push_back(e.u);
      order.push_back(&e);
    }
  }
  d.feat.resize(static_cast<Eigen::Index>(order.size()), 3);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const AugEdge& e = *order[i];
    d.feat(static_cast<Eigen::Index>(i), 0) =
        max_w > 0.0 ? static_cast<double>(e.w) / max_w : 0.0;
    d.feat(static_cast<Eigen::Index>(i), 1) = e.candidate ? 1.0 : 0.0;
    d.feat(static_cast<Eigen::Index>(i), 2) = e.u == e.v ? 1.0 : 0.0;
  }
  return d;
}

Var initial_state(nn::Workspace& ws, const std::string& prefix, const AugGraph& g,
                  const Var& context_rows, const EncoderConfig& cfg) {
  if (g.features.rows() != g.n)
    throw std::invalid_argument("augmented graph features not computed");
  Var x = ad::constant(g.features);
  Eigen::Index in = g.features.cols();
  if (context_rows.defined()) {
    if (context_rows.rows() != g.n) throw std::invalid_argument("context row mismatch");
    x = ad::concat_cols({x, context_rows});
    in += context_rows.cols();
  }
  return nn::linear(ws, prefix + "/in", in, cfg.hidden, x);
}

Var mpnn_round(nn::Workspace& ws, const std::string& prefix, const DirectedEdges& d,
               const Var& h, const EncoderConfig& cfg) {
  if (d.src.empty()) {
    Var zero_msg = ad::constant(Mat::Zero(h.rows(), cfg.hidden));
    return nn::gru_cell(ws, prefix + "/gru", cfg.hidden, h, zero_msg);
  }
  Var hs = ad::rows(h, d.src);
  Var ht = ad::rows(h, d.dst);
  Var inputs = ad::concat_cols({hs, ht, ad::constant(d.feat)});
  const Eigen::Index in = 2 * cfg.hidden + 3;
  Var msg = nn::mlp2(ws, prefix + "/msg", in, cfg.hidden, cfg.hidden, inputs);
  Var gate = ad::sigmoid(nn::mlp2(ws, prefix + "/gate", in, cfg.hidden, 1, inputs));
  Var gated = msg * ad::tile_cols(gate, cfg.hidden);
  Var agg = ad::segment_sum(gated, d.dst, static_cast<int>(h.rows()));
  return nn::gru_cell(ws, prefix + "/gru", cfg.hidden, h, agg);
}

Var attention_round(nn::Workspace& ws, const std::string& prefix, const Var& h,
                    const Mat& mask, const EncoderConfig& cfg) {
  const Eigen::Index dh = cfg.hidden;
  Var q = nn::linear(ws, prefix + "/q", dh, dh, h);
  Var k = nn::linear(ws, prefix + "/k", dh, dh, h);
  Var v = nn::linear(ws, prefix + "/v", dh, dh, h);
  Var scores = ad::scale(ad::matmul(q, ad::transpose(k)),
                         1.0 / std::sqrt(static_cast<double>(dh)));
  Var attn = ad::masked_softmax_rows(scores, mask);
  Var mixed = nn::linear(ws, prefix + "/o", dh, dh, ad::matmul(attn, v));
  return h + mixed;
}

}  // namespace

Var encode_mpnn(nn::Workspace& ws, const std::string& prefix, const AugGraph& g,
                const Var& context_rows, const EncoderConfig& cfg) {
  const DirectedEdges d = direct_edges(g);
  Var h = initial_state(ws, prefix, g, context_rows, cfg);
  for (int r = 0; r < cfg.rounds; ++r)
    h = mpnn_round(ws, prefix + "/round" + std::to_string(r), d, h, cfg);
  return h;
}

Var encode_mpnn_attention(nn::Workspace& ws, const std::string& prefix, const AugGraph& g,
                          const Var& context_rows, const Mat& attn_mask,
                          const EncoderConfig& cfg) {
  if (attn_mask.rows() != g.n || attn_mask.cols() != g.n)
    throw std::invalid_argument("mask shape mismatch");
  const DirectedEdges d = direct_edges(g);
  Var h = initial_state(ws, prefix, g, context_rows, cfg);
  for (int r = 0; r < cfg.rounds; ++r) {
    const std::string tag = prefix + "/round" + std::to_string(r);
    h = mpnn_round(ws, tag, d, h, cfg);
    h = attention_round(ws, tag + "/attn", h, attn_mask, cfg);
  }
  return h;
}

}  // namespace higen::enc
