#ifndef HIGEN_AUTODIFF_HPP
#define HIGEN_AUTODIFF_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace higen::ad {

using Mat = Eigen::MatrixXd;

/// One node of the dynamically built computation graph.
struct Node {
  Mat val;
  Mat grad;
  bool needs_grad = false;
  bool grad_ready = false;
  std::uint64_t id = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void accumulate(const Mat& g) {
    if (!grad_ready) {
      grad = g;
      grad_ready = true;
    } else {
      grad += g;
    }
  }
};

/// Handle to a matrix-valued node. Graphs are built define-by-run; calling
/// backward() on a 1x1 loss fills gradients of every reachable leaf.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> n) : n_(std::move(n)) {}

  bool defined() const { return static_cast<bool>(n_); }
  const Mat& value() const { return n_->val; }
  const Mat& grad() const { return n_->grad; }
  bool has_grad() const { return n_ && n_->grad_ready; }
  Eigen::Index rows() const { return n_->val.rows(); }
  Eigen::Index cols() const { return n_->val.cols(); }
  double scalar() const { return n_->val(0, 0); }
  std::shared_ptr<Node> node() const { return n_; }

 private:
  std::shared_ptr<Node> n_;
};

Var constant(Mat value);
Var param(Mat value);  // leaf that receives gradient

/// Reverse pass from a 1x1 loss node.
void backward(const Var& loss);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var div(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double c);
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var rows(const Var& a, std::vector<int> indices);
Var broadcast_rows(const Var& row, Eigen::Index n);   // 1xc -> nxc
Var tile_cols(const Var& col, Eigen::Index c);        // rx1 -> rxc
Var sum_rows(const Var& a);    // rxc -> 1xc
Var sum_cols(const Var& a);    // rxc -> rx1
Var sum_all(const Var& a);     // -> 1x1
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh_(const Var& a);
Var log_(const Var& a);
Var exp_(const Var& a);
Var clamp(const Var& a, double lo, double hi);  // zero gradient when clamped
Var softmax_rows(const Var& a);
/// Softmax per row over entries where mask is nonzero; masked entries get
/// weight exactly 0. Rows with an empty mask come out all zero.
Var masked_softmax_rows(const Var& a, const Mat& mask);
Var logsumexp_all(const Var& a);  // -> 1x1
/// Sums rows of `a` into `num_segments` buckets given per-row segment ids.
Var segment_sum(const Var& a, const std::vector<int>& segments, int num_segments);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }

}  // namespace higen::ad

#endif  // HIGEN_AUTODIFF_HPP
