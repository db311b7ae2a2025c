#include "higen/training.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "higen/util.hpp"

namespace higen::train {

namespace {

/// AR step indices of a community: 1..n-1 at the leaf (node 0 is free),
/// 0..n-1 elsewhere (the self-edge row exists from the start).
std::vector<int> step_indices(const CommunityRows& rows) {
  std::vector<int> steps;
  for (int t = rows.leaf ? 1 : 0; t < rows.size(); ++t) steps.push_back(t);
  return steps;
}

std::vector<int> sample_distinct(int n, int k, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

ad::Var step_logpmf(nn::Workspace& ws, const Model& model, int level,
                    const CommunityRows& rows, int t, Weight remaining,
                    const ad::Var& parent_ctx, Rng* shuffle_rng) {
  std::vector<Weight> u = rows.tri[static_cast<std::size_t>(t)];
  std::vector<int> perm;
  const std::vector<int>* perm_ptr = nullptr;
  if (shuffle_rng != nullptr) {
    perm.resize(u.size());
    std::iota(perm.begin(), perm.end(), 0);
    shuffle_rng->shuffle(perm);
    std::vector<Weight> shuffled(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      shuffled[i] = u[static_cast<std::size_t>(perm[i])];
    u = std::move(shuffled);
    perm_ptr = &perm;
  }
  heads::MixtureHead head =
      community_step_head(ws, model, level, rows, t, parent_ctx, perm_ptr);
  const bool bernoulli_row = rows.leaf &&
                             model.config().variant == Variant::higen_bernoulli;
  return bernoulli_row ? heads::bernoulli_row_logpmf(head, u)
                       : heads::community_row_logpmf(head, u, remaining);
}

}  // namespace

NllBuild build_graph_nll(nn::Workspace& ws, const Model& model,
                         const HierarchicalGraph& hg, const NllOptions& opts) {
  const int depth = hg.depth();
  if (depth != model.config().levels)
    throw std::invalid_argument("hierarchy depth does not match model");
  if (opts.ar_samples > 0 && opts.subsample_rng == nullptr)
    throw std::invalid_argument("subsampling needs an rng");

  NllBuild out;
  out.report.community.assign(static_cast<std::size_t>(depth), 0.0);
  out.report.bipartite.assign(static_cast<std::size_t>(depth), 0.0);
  std::vector<ad::Var> terms;

  for (int level = 1; level <= depth; ++level) {
    const LevelGraph& parent_graph = hg.level(level - 1);
    ad::Var parent_embeds = encode_parent_graph(ws, model, parent_graph, level);

    // Community AR rows, teacher forced.
    ad::Var community_nll;
    for (NodeId p = 0; p < parent_graph.node_count(); ++p) {
      const CommunityRows rows = teacher_rows(hg, level, p);
      std::vector<int> steps = step_indices(rows);
      if (steps.empty()) continue;

      double scale_factor = 1.0;
      if (opts.ar_samples > 0 && opts.ar_samples < static_cast<int>(steps.size())) {
        const int total_steps = static_cast<int>(steps.size());
        std::vector<int> chosen =
            sample_distinct(total_steps, opts.ar_samples, *opts.subsample_rng);
        std::vector<int> sampled;
        sampled.reserve(chosen.size());
        for (int c : chosen) sampled.push_back(steps[static_cast<std::size_t>(c)]);
        steps = std::move(sampled);
        scale_factor = static_cast<double>(total_steps) / static_cast<double>(steps.size());
      }

      // Remaining weight before each step.
      std::vector<Weight> prefix(static_cast<std::size_t>(rows.size()) + 1, 0);
      for (int t = 0; t < rows.size(); ++t)
        prefix[static_cast<std::size_t>(t) + 1] =
            prefix[static_cast<std::size_t>(t)] + rows.row_sum(t);
      const Weight total = parent_graph.self_loop(p);

      ad::Var parent_ctx = ad::rows(parent_embeds, {p});
      for (int t : steps) {
        const Weight remaining = total - prefix[static_cast<std::size_t>(t)];
        ad::Var lp = step_logpmf(ws, model, level, rows, t, remaining, parent_ctx,
                                 opts.candidate_shuffle_rng);
        ad::Var term = ad::scale(lp, -scale_factor);
        community_nll = community_nll.defined() ? community_nll + term : term;
      }
    }
    if (community_nll.defined()) {
      out.report.community[static_cast<std::size_t>(level) - 1] = community_nll.scalar();
      terms.push_back(community_nll);
    }

    // Bipartites.
    const LevelGraph& g = hg.level(level);
    std::vector<Edge> parent_edges;
    for (const Edge& e : sorted_edges(parent_graph))
      if (e.u != e.v) parent_edges.push_back(e);
    if (parent_edges.empty()) continue;

    LevelState state;
    state.node_count = g.node_count();
    state.communities = hg.community_orders(level);
    state.community_of = hg.parent_map(level);
    for (const Edge& e : g.edges()) {
      if (state.community_of[static_cast<std::size_t>(e.u)] ==
          state.community_of[static_cast<std::size_t>(e.v)])
        state.real_edges.push_back(e);
    }

    std::vector<BipartiteTask> tasks;
    for (const Edge& e : parent_edges) {
      BipartiteTask task;
      task.parent_u = e.u;
      task.parent_v = e.v;
      task.pairs = bipartite_candidate_pairs(
          state.communities[static_cast<std::size_t>(e.u)],
          state.communities[static_cast<std::size_t>(e.v)]);
      tasks.push_back(std::move(task));
    }

    const bool bernoulli_leaf = level == depth &&
                                model.config().variant == Variant::higen_bernoulli;
    auto task_nll = [&](const BipartiteTask& task, const LevelEncoding& encoding) {
      heads::MixtureHead head =
          bipartite_task_head(ws, model, level, task, encoding, parent_embeds);
      std::vector<Weight> w;
      w.reserve(task.pairs.size());
      for (const auto& [a, b] : task.pairs) w.push_back(g.weight(a, b));
      ad::Var lp = bernoulli_leaf ? heads::bernoulli_row_logpmf(head, w)
                                  : heads::bipartite_logpmf(head, w);
      return ad::scale(lp, -1.0);
    };

    ad::Var bipartite_nll;
    if (opts.bipartite_mode == BipartiteMode::joint) {
      std::vector<bool> include(state.communities.size(), true);
      std::vector<std::pair<NodeId, NodeId>> all_pairs;
      for (const BipartiteTask& task : tasks)
        all_pairs.insert(all_pairs.end(), task.pairs.begin(), task.pairs.end());
      const LevelEncoding encoding = encode_level_graph(
          ws, model, level, state, include, all_pairs, parent_graph, parent_embeds);
      for (const BipartiteTask& task : tasks) {
        ad::Var term = task_nll(task, encoding);
        bipartite_nll = bipartite_nll.defined() ? bipartite_nll + term : term;
      }
    } else {
      // Sequential: bipartites in parent-edge index order; earlier bipartite
      // edges become real edges of later augmented graphs.
      LevelState running = state;
      for (std::size_t k = 0; k < tasks.size(); ++k) {
        const BipartiteTask& task = tasks[k];
        std::vector<bool> include(state.communities.size(), false);
        const NodeId hi = std::max(task.parent_u, task.parent_v);
        for (NodeId c = 0; c <= hi; ++c) include[static_cast<std::size_t>(c)] = true;
        const LevelEncoding encoding = encode_level_graph(
            ws, model, level, running, include, task.pairs, parent_graph, parent_embeds);
        ad::Var term = task_nll(task, encoding);
        bipartite_nll = bipartite_nll.defined() ? bipartite_nll + term : term;
        for (const auto& [a, b] : task.pairs) {
          const Weight w = g.weight(a, b);
          if (w > 0) running.real_edges.push_back({std::min(a, b), std::max(a, b), w});
        }
      }
    }
    if (bipartite_nll.defined()) {
      out.report.bipartite[static_cast<std::size_t>(level) - 1] = bipartite_nll.scalar();
      terms.push_back(bipartite_nll);
    }
  }

  if (terms.empty()) {
    out.loss = ad::constant(ad::Mat::Zero(1, 1));
  } else {
    out.loss = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) out.loss = out.loss + terms[i];
  }

  if (opts.include_root && model.root().fitted())
    out.report.root = -model.root().logpmf(hg.total_weight());
  out.report.total = out.report.root;
  for (double c : out.report.community) out.report.total += c;
  for (double b : out.report.bipartite) out.report.total += b;
  return out;
}

LossReport graph_nll(const Model& model, const HierarchicalGraph& hg,
                     const NllOptions& opts) {
  nn::Workspace ws(const_cast<Model&>(model).params());
  return build_graph_nll(ws, model, hg, opts).report;
}

double subsampled_community_nll(const Model& model, const HierarchicalGraph& hg, int s,
                                Rng& rng) {
  if (s < 1) throw std::invalid_argument("need at least one sampled step");
  NllOptions opts;
  opts.ar_samples = s;
  opts.subsample_rng = &rng;
  opts.include_root = false;
  const LossReport report = graph_nll(model, hg, opts);
  return std::accumulate(report.community.begin(), report.community.end(), 0.0);
}

void adam_step(nn::ParamStore& params, const std::map<std::string, ad::Mat>& grads,
               AdamState& state, const TrainConfig& cfg) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (const auto& [name, grad] : grads) {
    if (!grad.allFinite())
      throw std::runtime_error("non-finite gradient for tensor " + name);
    ad::Mat& value = params.at(name);
    auto mit = state.m.find(name);
    if (mit == state.m.end()) {
      mit = state.m.emplace(name, ad::Mat::Zero(grad.rows(), grad.cols())).first;
      state.v.emplace(name, ad::Mat::Zero(grad.rows(), grad.cols()));
    }
    ad::Mat& m = mit->second;
    ad::Mat& v = state.v.at(name);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const ad::Mat m_hat = m / bc1;
    const ad::Mat v_hat = v / bc2;
    value -= cfg.learning_rate *
             (m_hat.array() / (v_hat.array().sqrt() + cfg.epsilon)).matrix();
  }
}

double grad_check(const std::function<ad::Var(nn::Workspace&)>& loss_builder,
                  nn::ParamStore& params, Rng& rng, int coords_per_tensor) {
  constexpr double kStep = 1e-4;

  nn::Workspace ws(params);
  ad::Var loss = loss_builder(ws);
  ad::backward(loss);
  const std::map<std::string, ad::Mat> analytic = ws.grads();

  auto eval = [&]() {
    nn::Workspace fresh(params);
    return loss_builder(fresh).scalar();
  };

  double max_rel = 0.0;
  for (const auto& [name, grad] : analytic) {
    ad::Mat& tensor = params.at(name);
    for (int i = 0; i < coords_per_tensor; ++i) {
      const auto r = static_cast<Eigen::Index>(rng.uniform_below(
          static_cast<std::uint64_t>(tensor.rows())));
      const auto c = static_cast<Eigen::Index>(rng.uniform_below(
          static_cast<std::uint64_t>(tensor.cols())));
      const double original = tensor(r, c);
      tensor(r, c) = original + kStep;
      const double up = eval();
      tensor(r, c) = original - kStep;
      const double down = eval();
      tensor(r, c) = original;
      const double fd = (up - down) / (2.0 * kStep);
      const double a = grad(r, c);
      const double rel = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

RootDistribution fit_root_distribution(const std::vector<HierarchicalGraph>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  RootDistribution root;
  for (const HierarchicalGraph& hg : dataset) {
    root.weights.push_back(hg.total_weight());
    root.node_counts.push_back(hg.leaf().node_count());
  }
  return root;
}

int max_community_size(const std::vector<HierarchicalGraph>& dataset) {
  int largest = 0;
  for (const HierarchicalGraph& hg : dataset)
    for (int l = 1; l <= hg.depth(); ++l)
      for (const auto& members : hg.community_orders(l))
        largest = std::max(largest, static_cast<int>(members.size()));
  return largest;
}

std::vector<TrainLogEntry> fit(Model& model, const std::vector<HierarchicalGraph>& data,
                               const TrainConfig& cfg, std::ostream* csv_log) {
  if (data.empty()) throw std::invalid_argument("empty training set");
  model.root() = fit_root_distribution(data);
  model.set_community_cap(2 * max_community_size(data));

  // Materialize every tensor up front so optimizer state and checkpoints
  // are complete even for rows a given batch never touches.
  {
    nn::Workspace warm(model.params());
    NllOptions opts;
    opts.bipartite_mode = cfg.bipartite_mode;
    build_graph_nll(warm, model, data.front(), opts);
  }

  Rng master(cfg.seed);
  AdamState state;
  std::vector<TrainLogEntry> log;
  const int depth = model.config().levels;

  for (int step = 1; step <= cfg.steps; ++step) {
    const int batch = std::max(1, cfg.batch_size);
    Rng pick = master.substream({0xBA7C4u, static_cast<std::uint64_t>(step)});
    std::vector<std::size_t> graph_idx(static_cast<std::size_t>(batch));
    for (auto& gi : graph_idx) gi = pick.uniform_below(data.size());

    std::vector<std::map<std::string, ad::Mat>> slot_grads(graph_idx.size());
    std::vector<LossReport> slot_reports(graph_idx.size());
    parallel_for(graph_idx.size(), [&](std::size_t slot) {
      Rng sub = master.substream(
          {0x5AB5u, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(slot)});
      NllOptions opts;
      opts.bipartite_mode = cfg.bipartite_mode;
      opts.ar_samples = cfg.ar_samples;
      opts.subsample_rng = cfg.ar_samples > 0 ? &sub : nullptr;
      nn::Workspace ws(model.params());
      NllBuild build = build_graph_nll(ws, model, data[graph_idx[slot]], opts);
      ad::backward(build.loss);
      slot_grads[slot] = ws.grads();
      slot_reports[slot] = build.report;
    });

    std::map<std::string, ad::Mat> grads;
    for (const auto& slot : slot_grads) {
      for (const auto& [name, g] : slot) {
        auto it = grads.find(name);
        if (it == grads.end())
          grads.emplace(name, g);
        else
          it->second += g;
      }
    }
    const double inv_batch = 1.0 / static_cast<double>(graph_idx.size());
    for (auto& [name, g] : grads) g *= inv_batch;
    adam_step(model.params(), grads, state, cfg);

    TrainLogEntry entry;
    entry.step = step;
    entry.community.assign(static_cast<std::size_t>(depth), 0.0);
    entry.bipartite.assign(static_cast<std::size_t>(depth), 0.0);
    for (const LossReport& r : slot_reports) {
      entry.nll += r.total * inv_batch;
      for (int l = 0; l < depth; ++l) {
        entry.community[static_cast<std::size_t>(l)] +=
            r.community[static_cast<std::size_t>(l)] * inv_batch;
        entry.bipartite[static_cast<std::size_t>(l)] +=
            r.bipartite[static_cast<std::size_t>(l)] * inv_batch;
      }
    }
    log.push_back(entry);

    if (csv_log != nullptr) {
      if (step == 1) {
        *csv_log << "step,nll";
        for (int l = 1; l <= depth; ++l) *csv_log << ",community_l" << l;
        for (int l = 1; l <= depth; ++l) *csv_log << ",bipartite_l" << l;
        *csv_log << "\n";
      }
      *csv_log << entry.step << "," << entry.nll;
      for (double c : entry.community) *csv_log << "," << c;
      for (double b : entry.bipartite) *csv_log << "," << b;
      *csv_log << "\n";
    }
  }
  return log;
}

}  // namespace higen::train
