#include "higen/model.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace higen {

heads::Activation ModelConfig::lambda_activation(int level) const {
  if (level < levels) return heads::Activation::softmax;
  return variant == Variant::higen_bernoulli ? heads::Activation::bernoulli
                                             : leaf_activation;
}

namespace {

std::string activation_name(heads::Activation a) {
  switch (a) {
    case heads::Activation::softmax: return "softmax";
    case heads::Activation::multihot: return "multihot";
    case heads::Activation::bernoulli: return "bernoulli";
  }
  return "softmax";
}

heads::Activation activation_from(const std::string& s) {
  if (s == "softmax") return heads::Activation::softmax;
  if (s == "multihot") return heads::Activation::multihot;
  if (s == "bernoulli") return heads::Activation::bernoulli;
  throw std::invalid_argument("unknown activation: " + s);
}

nlohmann::json config_to_json(const ModelConfig& cfg) {
  return {{"levels", cfg.levels},
          {"hidden_dim", cfg.hidden_dim},
          {"layers", cfg.layers},
          {"k_eig", cfg.k_eig},
          {"k_rw", cfg.k_rw},
          {"mixtures", cfg.mixtures},
          {"variant", cfg.variant == Variant::higen_m ? "higen-m" : "higen"},
          {"leaf_activation", activation_name(cfg.leaf_activation)}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.levels = j.value("levels", cfg.levels);
  cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
  cfg.layers = j.value("layers", cfg.layers);
  cfg.k_eig = j.value("k_eig", cfg.k_eig);
  cfg.k_rw = j.value("k_rw", cfg.k_rw);
  cfg.mixtures = j.value("mixtures", cfg.mixtures);
  cfg.variant = j.value("variant", std::string("higen-m")) == "higen"
                    ? Variant::higen_bernoulli
                    : Variant::higen_m;
  cfg.leaf_activation = activation_from(j.value("leaf_activation", std::string("multihot")));
  return cfg;
}

}  // namespace

std::string ModelConfig::to_json() const { return config_to_json(*this).dump(2); }

ModelConfig ModelConfig::from_json(const std::string& text) {
  return config_from_json(nlohmann::json::parse(text));
}

Weight RootDistribution::sample(Rng& rng) const {
  if (weights.empty()) throw std::logic_error("root distribution not fitted");
  return weights[rng.uniform_below(weights.size())];
}

double RootDistribution::logpmf(Weight w0) const {
  if (weights.empty()) throw std::logic_error("root distribution not fitted");
  const auto hits = std::count(weights.begin(), weights.end(), w0);
  if (hits == 0) return -std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(hits) / static_cast<double>(weights.size()));
}

Model::Model(ModelConfig cfg, std::uint64_t init_seed)
    : cfg_(cfg), params_(init_seed) {}

void Model::save(const std::string& path) const {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["config"] = config_to_json(cfg_);
  doc["init_seed"] = params_.init_seed();
  doc["community_cap"] = community_cap_;
  doc["root"] = {{"weights", root_.weights}, {"node_counts", root_.node_counts}};
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, mat] : params_.tensors()) {
    std::vector<double> data(mat.data(), mat.data() + mat.size());
    tensors[name] = {{"rows", mat.rows()}, {"cols", mat.cols()}, {"data", std::move(data)}};
  }
  doc["tensors"] = std::move(tensors);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << doc.dump();
}

Model Model::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  nlohmann::json doc;
  in >> doc;
  if (doc.value("format_version", 0) != 1)
    throw std::runtime_error("unsupported checkpoint version");

  Model model(config_from_json(doc.at("config")), doc.value("init_seed", std::uint64_t{0}));
  model.community_cap_ = doc.value("community_cap", 0);
  model.root_.weights = doc.at("root").at("weights").get<std::vector<Weight>>();
  model.root_.node_counts = doc.at("root").at("node_counts").get<std::vector<int>>();
  for (const auto& [name, jt] : doc.at("tensors").items()) {
    const auto rows = jt.at("rows").get<Eigen::Index>();
    const auto cols = jt.at("cols").get<Eigen::Index>();
    const auto data = jt.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw std::runtime_error("tensor size mismatch in checkpoint: " + name);
    ad::Mat m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    model.params_.put(name, std::move(m));
  }
  return model;
}

// ---------------------------------------------------------------------------

Weight CommunityRows::row_sum(int t) const {
  const auto& row = tri[static_cast<std::size_t>(t)];
  return std::accumulate(row.begin(), row.end(), Weight{0});
}

Weight CommunityRows::total() const {
  Weight w = 0;
  for (int t = 0; t < size(); ++t) w += row_sum(t);
  return w;
}

CommunityRows teacher_rows(const HierarchicalGraph& hg, int level, NodeId parent) {
  const LevelGraph& g = hg.level(level);
  const std::vector<NodeId>& order = hg.community_orders(level)[static_cast<std::size_t>(parent)];
  CommunityRows rows;
  rows.leaf = level == hg.depth();
  rows.tri.resize(order.size());
  for (std::size_t t = 0; t < order.size(); ++t) {
    auto& row = rows.tri[t];
    row.resize(rows.leaf ? t : t + 1, 0);
    for (std::size_t j = 0; j < t; ++j) row[j] = g.weight(order[t], order[j]);
    if (!rows.leaf) row[t] = g.self_loop(order[t]);
  }
  return rows;
}

enc::AugGraph community_step_graph(const CommunityRows& rows, int t,
                                   const enc::EncoderConfig& cfg) {
  if (t < 0 || t >= rows.size()) throw std::invalid_argument("step out of range");
  if (rows.leaf && t == 0) throw std::invalid_argument("leaf step 0 has no candidates");

  enc::AugGraph g;
  g.n = t + 1;
  for (int a = 0; a < t; ++a) {
    const auto& row = rows.tri[static_cast<std::size_t>(a)];
    for (std::size_t j = 0; j < row.size(); ++j)
      if (row[j] > 0)
        g.edges.push_back({a, static_cast<int>(j), row[j], false});
  }
  for (int j = 0; j < t; ++j) g.edges.push_back({t, j, 0, true});
  if (!rows.leaf) g.edges.push_back({t, t, 0, true});
  g.compute_features(cfg.k_eig, cfg.k_rw);
  return g;
}

ad::Var encode_parent_graph(nn::Workspace& ws, const Model& model,
                            const LevelGraph& g, int level) {
  enc::AugGraph aug;
  aug.n = g.node_count();
  for (const Edge& e : g.edges()) aug.edges.push_back({e.u, e.v, e.w, false});
  const enc::EncoderConfig cfg = model.config().encoder();
  aug.compute_features(cfg.k_eig, cfg.k_rw);
  const ad::Mat mask = ad::Mat::Ones(aug.n, aug.n);
  return enc::encode_mpnn_attention(ws, "L" + std::to_string(level) + "/parent_enc", aug,
                                    ad::Var(), mask, cfg);
}

heads::MixtureHead community_step_head(nn::Workspace& ws, const Model& model, int level,
                                       const CommunityRows& rows, int t,
                                       const ad::Var& parent_ctx,
                                       const std::vector<int>* candidate_perm) {
  const enc::EncoderConfig cfg = model.config().encoder();
  const enc::AugGraph aug = community_step_graph(rows, t, cfg);
  const std::string tag = "L" + std::to_string(level);

  ad::Var context = ad::broadcast_rows(parent_ctx, aug.n);
  ad::Var h = enc::encode_mpnn(ws, tag + "/com_enc", aug, context, cfg);

  // Candidate embeddings h_t - h_j; the self candidate at non-leaf levels
  // uses h_t itself (a zero difference would carry no signal).
  ad::Var embeds;
  if (t > 0) {
    std::vector<int> srcs(static_cast<std::size_t>(t), t);
    std::vector<int> dsts(static_cast<std::size_t>(t));
    std::iota(dsts.begin(), dsts.end(), 0);
    embeds = ad::rows(h, srcs) - ad::rows(h, dsts);
    if (!rows.leaf) embeds = ad::concat_rows({embeds, ad::rows(h, {t})});
  } else {
    embeds = ad::rows(h, {t});
  }
  if (candidate_perm != nullptr) embeds = ad::rows(embeds, *candidate_perm);

  ad::Var pooled = ad::sum_rows(h);
  return heads::community_row_head(ws, tag + "/com_head", embeds, pooled, parent_ctx,
                                   model.config().mixtures,
                                   model.config().lambda_activation(level));
}

std::vector<std::pair<NodeId, NodeId>> bipartite_candidate_pairs(
    const std::vector<NodeId>& left, const std::vector<NodeId>& right) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(left.size() * right.size());
  for (NodeId a : left)
    for (NodeId b : right) pairs.push_back({a, b});
  return pairs;
}

std::vector<Edge> sorted_edges(const LevelGraph& g) {
  std::vector<Edge> edges = g.edges();
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  return edges;
}

LevelEncoding encode_level_graph(nn::Workspace& ws, const Model& model, int level,
                                 const LevelState& state,
                                 const std::vector<bool>& include_community,
                                 const std::vector<std::pair<NodeId, NodeId>>& candidates,
                                 const LevelGraph& parent_graph,
                                 const ad::Var& parent_embeds) {
  LevelEncoding out;
  out.local_of.assign(static_cast<std::size_t>(state.node_count), -1);

  std::vector<int> parent_of_local;
  int local = 0;
  for (std::size_t p = 0; p < state.communities.size(); ++p) {
    if (!include_community[p]) continue;
    for (NodeId v : state.communities[p]) {
      out.local_of[static_cast<std::size_t>(v)] = local++;
      parent_of_local.push_back(static_cast<int>(p));
    }
  }

  enc::AugGraph aug;
  aug.n = local;
  for (const Edge& e : state.real_edges) {
    const int lu = out.local_of[static_cast<std::size_t>(e.u)];
    const int lv = out.local_of[static_cast<std::size_t>(e.v)];
    if (lu >= 0 && lv >= 0) aug.edges.push_back({lu, lv, e.w, false});
  }
  for (const auto& [a, b] : candidates) {
    const int la = out.local_of[static_cast<std::size_t>(a)];
    const int lb = out.local_of[static_cast<std::size_t>(b)];
    if (la < 0 || lb < 0) throw std::logic_error("candidate endpoint not included");
    aug.edges.push_back({la, lb, 0, true});
  }
  const enc::EncoderConfig cfg = model.config().encoder();
  aug.compute_features(cfg.k_eig, cfg.k_rw);

  // Attention allowed within a community and across parent-edge-joined ones.
  ad::Mat mask(aug.n, aug.n);
  for (int i = 0; i < aug.n; ++i) {
    for (int j = 0; j < aug.n; ++j) {
      const int pi = parent_of_local[static_cast<std::size_t>(i)];
      const int pj = parent_of_local[static_cast<std::size_t>(j)];
      mask(i, j) = (pi == pj || parent_graph.weight(pi, pj) > 0) ? 1.0 : 0.0;
    }
  }

  ad::Var context = ad::rows(parent_embeds, parent_of_local);
  out.embeds = enc::encode_mpnn_attention(ws, "L" + std::to_string(level) + "/bp_enc", aug,
                                          context, mask, cfg);
  return out;
}

heads::MixtureHead bipartite_task_head(nn::Workspace& ws, const Model& model, int level,
                                       const BipartiteTask& task,
                                       const LevelEncoding& encoding,
                                       const ad::Var& parent_embeds) {
  std::vector<int> srcs, dsts;
  srcs.reserve(task.pairs.size());
  dsts.reserve(task.pairs.size());
  for (const auto& [a, b] : task.pairs) {
    srcs.push_back(encoding.local_of[static_cast<std::size_t>(a)]);
    dsts.push_back(encoding.local_of[static_cast<std::size_t>(b)]);
  }
  ad::Var embeds = ad::rows(encoding.embeds, srcs) - ad::rows(encoding.embeds, dsts);
  ad::Var parent_ctx = ad::rows(parent_embeds, {task.parent_u}) -
                       ad::rows(parent_embeds, {task.parent_v});

  const bool leaf = level == model.config().levels;
  const heads::Activation act =
      leaf && model.config().variant == Variant::higen_bernoulli
          ? heads::Activation::bernoulli
          : heads::Activation::softmax;
  return heads::bipartite_head(ws, "L" + std::to_string(level) + "/bp_head", embeds,
                               parent_ctx, model.config().mixtures, act);
}

}  // namespace higen
