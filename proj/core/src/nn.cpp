#include "higen/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace higen::nn {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Mat& ParamStore::get_or_create(const std::string& name, Eigen::Index rows,
                               Eigen::Index cols, bool zero_init) {
  auto it = tensors_.find(name);
  if (it != tensors_.end()) {
    if (it->second.rows() != rows || it->second.cols() != cols)
      throw std::logic_error("parameter shape mismatch: " + name);
    return it->second;
  }
  Mat m(rows, cols);
  if (zero_init) {
    m.setZero();
  } else {
    Rng rng(init_seed_ ^ fnv1a(name));
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        m(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return tensors_.emplace(name, std::move(m)).first->second;
}

Mat& ParamStore::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

const Mat& ParamStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

Var Workspace::p(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                 bool zero_init) {
  auto it = leaves_.find(name);
  if (it != leaves_.end()) return it->second;
  Var leaf = ad::param(store_->get_or_create(name, rows, cols, zero_init));
  leaves_.emplace(name, leaf);
  return leaf;
}

std::map<std::string, Mat> Workspace::grads() const {
  std::map<std::string, Mat> out;
  for (const auto& [name, var] : leaves_)
    if (var.has_grad()) out.emplace(name, var.grad());
  return out;
}

Var linear(Workspace& ws, const std::string& prefix, Eigen::Index in, Eigen::Index out,
           const Var& x) {
  if (x.cols() != in) throw std::invalid_argument("linear input width mismatch: " + prefix);
  Var w = ws.p(prefix + "/W", in, out);
  Var b = ws.p(prefix + "/b", 1, out, /*zero_init=*/true);
  return ad::matmul(x, w) + ad::broadcast_rows(b, x.rows());
}

Var mlp2(Workspace& ws, const std::string& prefix, Eigen::Index in, Eigen::Index hidden,
         Eigen::Index out, const Var& x) {
  Var h = ad::relu(linear(ws, prefix + "/fc0", in, hidden, x));
  h = ad::relu(linear(ws, prefix + "/fc1", hidden, hidden, h));
  return linear(ws, prefix + "/fc2", hidden, out, h);
}

Var gru_cell(Workspace& ws, const std::string& prefix, Eigen::Index dim, const Var& h,
             const Var& m) {
  Var hm = ad::concat_cols({h, m});
  Var z = ad::sigmoid(linear(ws, prefix + "/z", 2 * dim, dim, hm));
  Var r = ad::sigmoid(linear(ws, prefix + "/r", 2 * dim, dim, hm));
  Var cand = ad::tanh_(linear(ws, prefix + "/c", 2 * dim, dim, ad::concat_cols({r * h, m})));
  Var ones = ad::constant(Mat::Ones(h.rows(), h.cols()));
  return (ones - z) * h + z * cand;
}

}  // namespace higen::nn
