#ifndef HIGEN_TRAINING_HPP
#define HIGEN_TRAINING_HPP

#include <functional>
#include <map>
#include <ostream>
#include <vector>

#include "higen/model.hpp"

namespace higen::train {

struct TrainConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 8;
  int steps = 1000;
  int ar_samples = 0;  // sampled AR steps per community; 0 = exact
  BipartiteMode bipartite_mode = BipartiteMode::joint;
  std::uint64_t seed = 7;
};

struct LossReport {
  double total = 0.0;  // community + bipartite + root
  std::vector<double> community;  // index l-1 holds level l
  std::vector<double> bipartite;
  double root = 0.0;
};

struct NllOptions {
  BipartiteMode bipartite_mode = BipartiteMode::joint;
  int ar_samples = 0;                // 0 = all steps (exact)
  Rng* subsample_rng = nullptr;      // required when ar_samples > 0
  Rng* candidate_shuffle_rng = nullptr;  // shuffles candidate order inside steps
  bool include_root = true;
};

struct NllBuild {
  ad::Var loss;  // community + bipartite terms (root is parameter-free)
  LossReport report;
};

/// Teacher-forced negative log-likelihood of one HG on a fresh tape.
NllBuild build_graph_nll(nn::Workspace& ws, const Model& model,
                         const HierarchicalGraph& hg, const NllOptions& opts);

/// Value-only convenience wrapper.
LossReport graph_nll(const Model& model, const HierarchicalGraph& hg,
                     const NllOptions& opts = {});

/// Unbiased estimator of the exact community NLL term using at most s
/// sampled AR steps per community (community size times the mean sampled
/// step NLL). s past the available steps falls back to the exact sum.
double subsampled_community_nll(const Model& model, const HierarchicalGraph& hg, int s,
                                Rng& rng);

struct AdamState {
  std::map<std::string, ad::Mat> m;
  std::map<std::string, ad::Mat> v;
  long step = 0;
};

/// Standard Adam update with bias correction. Throws on non-finite
/// gradients; tensors absent from `grads` keep their state.
void adam_step(nn::ParamStore& params, const std::map<std::string, ad::Mat>& grads,
               AdamState& state, const TrainConfig& cfg);

/// Central-finite-difference check (step 1e-4) of the analytic gradient on
/// `coords_per_tensor` random coordinates per tensor; returns the max
/// relative error.
double grad_check(const std::function<ad::Var(nn::Workspace&)>& loss_builder,
                  nn::ParamStore& params, Rng& rng, int coords_per_tensor = 10);

/// Empirical distribution of training root weights (node counts recorded).
RootDistribution fit_root_distribution(const std::vector<HierarchicalGraph>& dataset);

/// Largest community size in the dataset (for the generation cap).
int max_community_size(const std::vector<HierarchicalGraph>& dataset);

struct TrainLogEntry {
  int step = 0;
  double nll = 0.0;
  std::vector<double> community;
  std::vector<double> bipartite;
};

/// Minibatch maximum-likelihood training; fits the root distribution and
/// community cap, then runs cfg.steps Adam steps. Optionally streams a CSV
/// log (step, nll, per-level terms).
std::vector<TrainLogEntry> fit(Model& model, const std::vector<HierarchicalGraph>& data,
                               const TrainConfig& cfg, std::ostream* csv_log = nullptr);

}  // namespace higen::train

#endif  // HIGEN_TRAINING_HPP
