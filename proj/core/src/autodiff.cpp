#include "higen/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace higen::ad {

namespace {

std::atomic<std::uint64_t> next_id{1};

Var make(Mat val, std::vector<Var> parents, std::function<void(Node&)> bw) {
  auto node = std::make_shared<Node>();
  node->val = std::move(val);
  node->id = next_id.fetch_add(1, std::memory_order_relaxed);
  for (const Var& p : parents) {
    node->needs_grad = node->needs_grad || p.node()->needs_grad;
    node->parents.push_back(p.node());
  }
  if (node->needs_grad) node->backward = std::move(bw);
  return Var(std::move(node));
}

void check_same_shape(const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("shape mismatch");
}

}  // namespace

Var constant(Mat value) {
  auto node = std::make_shared<Node>();
  node->val = std::move(value);
  node->id = next_id.fetch_add(1, std::memory_order_relaxed);
  return Var(std::move(node));
}

Var param(Mat value) {
  auto node = std::make_shared<Node>();
  node->val = std::move(value);
  node->needs_grad = true;
  node->id = next_id.fetch_add(1, std::memory_order_relaxed);
  return Var(std::move(node));
}

void backward(const Var& loss) {
  if (loss.rows() != 1 || loss.cols() != 1)
    throw std::invalid_argument("backward needs a 1x1 loss");

  // Topological order by construction id (children always have larger ids).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<Node*> stack{loss.node().get()};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!n->needs_grad || visited.count(n)) continue;
    visited.insert(n);
    order.push_back(n);
    for (const auto& p : n->parents) stack.push_back(p.get());
  }
  std::sort(order.begin(), order.end(),
            [](const Node* a, const Node* b) { return a->id > b->id; });

  loss.node()->accumulate(Mat::Ones(1, 1));
  for (Node* n : order) {
    if (n->backward && n->grad_ready) n->backward(*n);
  }
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b);
  return make(a.value() + b.value(), {a, b}, [a, b](Node& self) {
    if (a.node()->needs_grad) a.node()->accumulate(self.grad);
    if (b.node()->needs_grad) b.node()->accumulate(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b);
  return make(a.value() - b.value(), {a, b}, [a, b](Node& self) {
    if (a.node()->needs_grad) a.node()->accumulate(self.grad);
    if (b.node()->needs_grad) b.node()->accumulate(-self.grad);
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b);
  return make(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Node& self) {
    if (a.node()->needs_grad) a.node()->accumulate(self.grad.cwiseProduct(b.value()));
    if (b.node()->needs_grad) b.node()->accumulate(self.grad.cwiseProduct(a.value()));
  });
}

Var div(const Var& a, const Var& b) {
  check_same_shape(a, b);
  return make(a.value().cwiseQuotient(b.value()), {a, b}, [a, b](Node& self) {
    if (a.node()->needs_grad)
      a.node()->accumulate(self.grad.cwiseQuotient(b.value()));
    if (b.node()->needs_grad)
      b.node()->accumulate(
          -(self.grad.cwiseProduct(self.val).cwiseQuotient(b.value())));
  });
}

Var scale(const Var& a, double c) {
  return make(a.value() * c, {a}, [a, c](Node& self) {
    a.node()->accumulate(self.grad * c);
  });
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul shape mismatch");
  return make(a.value() * b.value(), {a, b}, [a, b](Node& self) {
    if (a.node()->needs_grad) a.node()->accumulate(self.grad * b.value().transpose());
    if (b.node()->needs_grad) b.node()->accumulate(a.value().transpose() * self.grad);
  });
}

Var transpose(const Var& a) {
  return make(a.value().transpose(), {a}, [a](Node& self) {
    a.node()->accumulate(self.grad.transpose());
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat of nothing");
  const Eigen::Index r = parts.front().rows();
  Eigen::Index total = 0;
  for (const Var& p : parts) {
    if (p.rows() != r) throw std::invalid_argument("concat row mismatch");
    total += p.cols();
  }
  Mat out(r, total);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return make(std::move(out), parts, [parts](Node& self) {
    Eigen::Index at = 0;
    for (const Var& p : parts) {
      if (p.node()->needs_grad)
        p.node()->accumulate(self.grad.middleCols(at, p.cols()));
      at += p.cols();
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat of nothing");
  const Eigen::Index c = parts.front().cols();
  Eigen::Index total = 0;
  for (const Var& p : parts) {
    if (p.cols() != c) throw std::invalid_argument("concat col mismatch");
    total += p.rows();
  }
  Mat out(total, c);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return make(std::move(out), parts, [parts](Node& self) {
    Eigen::Index at = 0;
    for (const Var& p : parts) {
      if (p.node()->needs_grad)
        p.node()->accumulate(self.grad.middleRows(at, p.rows()));
      at += p.rows();
    }
  });
}

Var rows(const Var& a, std::vector<int> indices) {
  Mat out(static_cast<Eigen::Index>(indices.size()), a.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= a.rows())
      throw std::invalid_argument("row index out of range");
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(indices[i]);
  }
  return make(std::move(out), {a}, [a, idx = std::move(indices)](Node& self) {
    Mat g = Mat::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
      g.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
    a.node()->accumulate(g);
  });
}

Var broadcast_rows(const Var& row, Eigen::Index n) {
  if (row.rows() != 1) throw std::invalid_argument("broadcast_rows needs a row vector");
  return make(row.value().replicate(n, 1), {row}, [row](Node& self) {
    row.node()->accumulate(self.grad.colwise().sum());
  });
}

Var tile_cols(const Var& col, Eigen::Index c) {
  if (col.cols() != 1) throw std::invalid_argument("tile_cols needs a column vector");
  return make(col.value().replicate(1, c), {col}, [col](Node& self) {
    col.node()->accumulate(self.grad.rowwise().sum());
  });
}

Var sum_rows(const Var& a) {
  return make(a.value().colwise().sum(), {a}, [a](Node& self) {
    a.node()->accumulate(self.grad.replicate(a.rows(), 1));
  });
}

Var sum_cols(const Var& a) {
  return make(a.value().rowwise().sum(), {a}, [a](Node& self) {
    a.node()->accumulate(self.grad.replicate(1, a.cols()));
  });
}

Var sum_all(const Var& a) {
  Mat out(1, 1);
  out(0, 0) = a.value().sum();
  return make(std::move(out), {a}, [a](Node& self) {
    a.node()->accumulate(Mat::Constant(a.rows(), a.cols(), self.grad(0, 0)));
  });
}

Var relu(const Var& a) {
  return make(a.value().cwiseMax(0.0), {a}, [a](Node& self) {
    a.node()->accumulate(
        self.grad.cwiseProduct((a.value().array() > 0.0).cast<double>().matrix()));
  });
}

Var sigmoid(const Var& a) {
  Mat s = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return make(std::move(s), {a}, [a](Node& self) {
    const auto& s = self.val.array();
    a.node()->accumulate((self.grad.array() * s * (1.0 - s)).matrix());
  });
}

Var tanh_(const Var& a) {
  Mat t = a.value().array().tanh().matrix();
  return make(std::move(t), {a}, [a](Node& self) {
    const auto& t = self.val.array();
    a.node()->accumulate((self.grad.array() * (1.0 - t * t)).matrix());
  });
}

Var log_(const Var& a) {
  return make(a.value().array().log().matrix(), {a}, [a](Node& self) {
    a.node()->accumulate((self.grad.array() / a.value().array()).matrix());
  });
}

Var exp_(const Var& a) {
  return make(a.value().array().exp().matrix(), {a}, [a](Node& self) {
    a.node()->accumulate(self.grad.cwiseProduct(self.val));
  });
}

Var clamp(const Var& a, double lo, double hi) {
  return make(a.value().cwiseMax(lo).cwiseMin(hi), {a}, [a, lo, hi](Node& self) {
    const auto inside =
        (a.value().array() > lo && a.value().array() < hi).cast<double>();
    a.node()->accumulate(self.grad.cwiseProduct(inside.matrix()));
  });
}

Var softmax_rows(const Var& a) {
  Mat out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double mx = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - mx).exp();
    out.row(r) /= out.row(r).sum();
  }
  return make(std::move(out), {a}, [a](Node& self) {
    const Mat& s = self.val;
    Mat g(s.rows(), s.cols());
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      const double dot = self.grad.row(r).dot(s.row(r));
      g.row(r) = (self.grad.row(r).array() - dot) * s.row(r).array();
    }
    a.node()->accumulate(g);
  });
}

Var masked_softmax_rows(const Var& a, const Mat& mask) {
  if (mask.rows() != a.rows() || mask.cols() != a.cols())
    throw std::invalid_argument("mask shape mismatch");
  Mat out = Mat::Zero(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      if (mask(r, c) != 0.0) mx = std::max(mx, a.value()(r, c));
    if (!std::isfinite(mx)) continue;  // fully masked row stays zero
    double denom = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (mask(r, c) != 0.0) {
        out(r, c) = std::exp(a.value()(r, c) - mx);
        denom += out(r, c);
      }
    }
    out.row(r) /= denom;
  }
  return make(std::move(out), {a}, [a](Node& self) {
    const Mat& s = self.val;
    Mat g(s.rows(), s.cols());
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      const double dot = self.grad.row(r).dot(s.row(r));
      g.row(r) = (self.grad.row(r).array() - dot) * s.row(r).array();
    }
    a.node()->accumulate(g);
  });
}

Var logsumexp_all(const Var& a) {
  const double mx = a.value().maxCoeff();
  Mat out(1, 1);
  if (!std::isfinite(mx)) {
    out(0, 0) = mx;
    return make(std::move(out), {a}, [a](Node& self) {
      a.node()->accumulate(Mat::Zero(a.rows(), a.cols()));
    });
  }
  out(0, 0) = mx + std::log((a.value().array() - mx).exp().sum());
  return make(std::move(out), {a}, [a](Node& self) {
    const double lse = self.val(0, 0);
    const Mat soft = (a.value().array() - lse).exp().matrix();
    a.node()->accumulate(soft * self.grad(0, 0));
  });
}

Var segment_sum(const Var& a, const std::vector<int>& segments, int num_segments) {
  if (static_cast<Eigen::Index>(segments.size()) != a.rows())
    throw std::invalid_argument("segment ids must cover all rows");
  Mat out = Mat::Zero(num_segments, a.cols());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i] < 0 || segments[i] >= num_segments)
      throw std::invalid_argument("segment id out of range");
    out.row(segments[i]) += a.value().row(static_cast<Eigen::Index>(i));
  }
  return make(std::move(out), {a}, [a, seg = segments](Node& self) {
    Mat g(a.rows(), a.cols());
    for (std::size_t i = 0; i < seg.size(); ++i)
      g.row(static_cast<Eigen::Index>(i)) = self.grad.row(seg[i]);
    a.node()->accumulate(g);
  });
}

}  // namespace higen::ad
