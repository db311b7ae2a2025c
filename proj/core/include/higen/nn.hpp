#ifndef HIGEN_NN_HPP
#define HIGEN_NN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "higen/autodiff.hpp"
#include "higen/rng.hpp"

namespace higen::nn {

using ad::Mat;
using ad::Var;

/// Flat store of named parameter tensors. Tensors are created on first use
/// with a Xavier init seeded by (init_seed, name), so values do not depend
/// on creation order.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t init_seed = 0) : init_seed_(init_seed) {}

  Mat& get_or_create(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                     bool zero_init = false);
  Mat& at(const std::string& name);
  const Mat& at(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) > 0; }
  void put(const std::string& name, Mat value) { tensors_[name] = std::move(value); }

  const std::map<std::string, Mat>& tensors() const { return tensors_; }
  std::map<std::string, Mat>& tensors() { return tensors_; }
  std::uint64_t init_seed() const { return init_seed_; }

 private:
  std::uint64_t init_seed_;
  std::map<std::string, Mat> tensors_;
};

/// Per-forward tape context. Hands out one leaf Var per parameter tensor so
/// gradients accumulate correctly across reuse, and collects them after
/// backward().
class Workspace {
 public:
  explicit Workspace(ParamStore& store) : store_(&store) {}

  /// Leaf for an existing-or-created parameter tensor.
  Var p(const std::string& name, Eigen::Index rows, Eigen::Index cols,
        bool zero_init = false);

  /// Gradients of every parameter touched in this tape; tensors without a
  /// gradient are omitted.
  std::map<std::string, Mat> grads() const;

  ParamStore& store() { return *store_; }

 private:
  ParamStore* store_;
  std::map<std::string, Var> leaves_;
};

/// x * W + b with W named prefix+"/W", b prefix+"/b".
Var linear(Workspace& ws, const std::string& prefix, Eigen::Index in, Eigen::Index out,
           const Var& x);

/// Two hidden layers with ReLU, linear output (the MLP shape used by every
/// output head and message function).
Var mlp2(Workspace& ws, const std::string& prefix, Eigen::Index in, Eigen::Index hidden,
         Eigen::Index out, const Var& x);

/// GRU-style update of per-row state h given aggregated messages m.
Var gru_cell(Workspace& ws, const std::string& prefix, Eigen::Index dim, const Var& h,
             const Var& m);

}  // namespace higen::nn

#endif  // HIGEN_NN_HPP
