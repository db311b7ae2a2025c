#include "higen/heads.hpp"

#include <cmath>
#include <stdexcept>

namespace higen::heads {

namespace {

constexpr double kProbFloor = 1e-12;

double log_factorial(Weight n) { return std::lgamma(static_cast<double>(n) + 1.0); }

ad::Var log_clamped(const ad::Var& p) {
  return ad::log_(ad::clamp(p, kProbFloor, 1.0));
}

ad::Mat counts_column(const std::vector<Weight>& u) {
  ad::Mat col(static_cast<Eigen::Index>(u.size()), 1);
  for (std::size_t i = 0; i < u.size(); ++i) col(static_cast<Eigen::Index>(i), 0) = static_cast<double>(u[i]);
  return col;
}

}  // namespace

ad::Var leaf_activation(const ad::Var& logits, Activation mode) {
  switch (mode) {
    case Activation::softmax:
      return ad::softmax_rows(logits);
    case Activation::multihot: {
      ad::Var s = ad::sigmoid(logits);
      return ad::div(s, ad::tile_cols(ad::sum_cols(s), logits.cols()));
    }
    case Activation::bernoulli:
      return ad::sigmoid(logits);
  }
  throw std::invalid_argument("unknown activation mode");
}

MixtureHead community_row_head(nn::Workspace& ws, const std::string& prefix,
                               const ad::Var& edge_embeds, const ad::Var& pooled,
                               const ad::Var& parent_ctx, int mixtures,
                               Activation lambda_activation) {
  const Eigen::Index e_count = edge_embeds.rows();
  const Eigen::Index dh = edge_embeds.cols();
  if (e_count < 1) throw std::invalid_argument("community head needs candidate edges");

  ad::Var edge_in = ad::concat_cols({edge_embeds, ad::broadcast_rows(pooled, e_count),
                                     ad::broadcast_rows(parent_ctx, e_count)});
  ad::Var logits = nn::mlp2(ws, prefix + "/theta", 3 * dh, dh, mixtures, edge_in);
  ad::Var lambda = leaf_activation(ad::transpose(logits), lambda_activation);

  ad::Var graph_in = ad::concat_cols({pooled, parent_ctx});
  ad::Var eta = ad::sigmoid(nn::mlp2(ws, prefix + "/eta", 2 * dh, dh, mixtures, graph_in));
  ad::Var beta = ad::softmax_rows(nn::mlp2(ws, prefix + "/beta", 2 * dh, dh, mixtures, graph_in));
  return {beta, eta, lambda};
}

MixtureHead bipartite_head(nn::Workspace& ws, const std::string& prefix,
                           const ad::Var& edge_embeds, const ad::Var& parent_edge_ctx,
                           int mixtures, Activation lambda_activation) {
  const Eigen::Index e_count = edge_embeds.rows();
  const Eigen::Index dh = edge_embeds.cols();
  if (e_count < 1) throw std::invalid_argument("bipartite head needs candidate edges");

  ad::Var edge_in =
      ad::concat_cols({edge_embeds, ad::broadcast_rows(parent_edge_ctx, e_count)});
  ad::Var logits = nn::mlp2(ws, prefix + "/theta", 2 * dh, dh, mixtures, edge_in);
  ad::Var lambda = leaf_activation(ad::transpose(logits), lambda_activation);

  ad::Var graph_in = ad::concat_cols({ad::sum_rows(edge_embeds), parent_edge_ctx});
  ad::Var beta = ad::softmax_rows(nn::mlp2(ws, prefix + "/beta", 2 * dh, dh, mixtures, graph_in));
  return {beta, ad::Var(), lambda};
}

ad::Var community_row_logpmf(const MixtureHead& head, const std::vector<Weight>& u,
                             Weight r) {
  if (static_cast<Eigen::Index>(u.size()) != head.lambda.cols())
    throw std::invalid_argument("count vector does not match candidate edges");
  Weight v = 0;
  double log_coeff = 0.0;
  for (Weight x : u) {
    if (x < 0) throw std::invalid_argument("negative count");
    v += x;
    log_coeff -= log_factorial(x);
  }
  if (v > r) throw std::invalid_argument("row total exceeds remaining weight");
  log_coeff += log_factorial(v);                                    // multinomial coefficient
  log_coeff += log_factorial(r) - log_factorial(v) - log_factorial(r - v);  // binomial coefficient

  ad::Var log_eta = log_clamped(ad::clamp(head.eta, kProbFloor, 1.0 - kProbFloor));
  ad::Var one_minus =
      ad::constant(ad::Mat::Ones(1, head.eta.cols())) - head.eta;
  ad::Var log_1m_eta = log_clamped(ad::clamp(one_minus, kProbFloor, 1.0 - kProbFloor));
  ad::Var binomial = ad::scale(log_eta, static_cast<double>(v)) +
                     ad::scale(log_1m_eta, static_cast<double>(r - v));

  ad::Var multinomial =
      ad::transpose(ad::matmul(log_clamped(head.lambda), ad::constant(counts_column(u))));

  ad::Var per_k = binomial + multinomial + log_clamped(head.beta);
  return ad::logsumexp_all(per_k) +
         ad::constant(ad::Mat::Constant(1, 1, log_coeff));
}

ad::Var bipartite_logpmf(const MixtureHead& head, const std::vector<Weight>& w) {
  if (static_cast<Eigen::Index>(w.size()) != head.lambda.cols())
    throw std::invalid_argument("count vector does not match candidate edges");
  Weight total = 0;
  double log_coeff = 0.0;
  for (Weight x : w) {
    if (x < 0) throw std::invalid_argument("negative count");
    total += x;
    log_coeff -= log_factorial(x);
  }
  log_coeff += log_factorial(total);

  ad::Var multinomial =
      ad::transpose(ad::matmul(log_clamped(head.lambda), ad::constant(counts_column(w))));
  ad::Var per_k = multinomial + log_clamped(head.beta);
  return ad::logsumexp_all(per_k) + ad::constant(ad::Mat::Constant(1, 1, log_coeff));
}

ad::Var bernoulli_row_logpmf(const MixtureHead& head, const std::vector<Weight>& u) {
  if (static_cast<Eigen::Index>(u.size()) != head.lambda.cols())
    throw std::invalid_argument("count vector does not match candidate edges");
  std::vector<Weight> complement(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] != 0 && u[i] != 1)
      throw std::invalid_argument("bernoulli rows need binary counts");
    complement[i] = 1 - u[i];
  }
  ad::Var probs = ad::clamp(head.lambda, kProbFloor, 1.0 - kProbFloor);
  ad::Var ones = ad::constant(ad::Mat::Ones(head.lambda.rows(), head.lambda.cols()));
  ad::Var on = ad::matmul(ad::log_(probs), ad::constant(counts_column(u)));
  ad::Var off = ad::matmul(ad::log_(ones - probs), ad::constant(counts_column(complement)));
  ad::Var per_k = ad::transpose(on + off) + log_clamped(head.beta);
  return ad::logsumexp_all(per_k);
}

}  // namespace higen::heads
