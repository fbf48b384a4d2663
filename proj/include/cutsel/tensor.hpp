#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "cutsel/common.hpp"

namespace cutsel {

/// Reverse-mode autodiff over small dense row-major matrices. The tape is a
/// DAG of shared nodes; backward replays it in descending creation order, so
/// gradient accumulation order is canonical and results are run-to-run
/// identical. Single-threaded by design: the creation counter is global.
class Tensor {
 public:
  struct Node {
    int rows = 0, cols = 0;
    std::vector<double> val;
    std::vector<double> grad;
    bool requires_grad = false;
    std::uint64_t order = 0;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> back;  // empty for leaves/constants

    double& g(int r, int c) { return grad[static_cast<std::size_t>(r) * cols + c]; }
    double v(int r, int c) const { return val[static_cast<std::size_t>(r) * cols + c]; }
  };

  Tensor() = default;

  static Tensor leaf(int rows, int cols, bool requires_grad = true) {
    Tensor t;
    t.n_ = fresh(rows, cols);
    t.n_->requires_grad = requires_grad;
    return t;
  }

  static Tensor constant(int rows, int cols, std::vector<double> values) {
    if (static_cast<int>(values.size()) != rows * cols)
      throw std::invalid_argument("Tensor::constant: size mismatch");
    Tensor t;
    t.n_ = fresh(rows, cols);
    t.n_->val = std::move(values);
    return t;
  }

  static Tensor scalar_const(double v) { return constant(1, 1, {v}); }

  bool defined() const { return n_ != nullptr; }
  int rows() const { return n_->rows; }
  int cols() const { return n_->cols; }
  int size() const { return n_->rows * n_->cols; }
  bool requires_grad() const { return n_->requires_grad; }

  double at(int r, int c) const { return n_->v(r, c); }
  double item() const {
    if (size() != 1) throw std::invalid_argument("Tensor::item: not a scalar");
    return n_->val[0];
  }
  std::vector<double>& values() { return n_->val; }
  const std::vector<double>& values() const { return n_->val; }
  std::vector<double>& grad() { return n_->grad; }
  const std::vector<double>& grad() const { return n_->grad; }

  std::shared_ptr<Node> node() const { return n_; }

  /// Backpropagates from a scalar loss through every reachable node.
  void backward() const {
    if (size() != 1) throw std::invalid_argument("backward: loss must be a scalar");
    // reachable set
    std::vector<Node*> order;
    std::vector<std::shared_ptr<Node>> stack{n_};
    std::unordered_set<Node*> seen;
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur.get()).second) continue;
      order.push_back(cur.get());
      for (const auto& p : cur->parents) stack.push_back(p);
    }
    std::sort(order.begin(), order.end(),
              [](const Node* a, const Node* b) { return a->order > b->order; });
    for (Node* nd : order) nd->grad.assign(nd->val.size(), 0.0);
    n_->grad[0] = 1.0;
    for (Node* nd : order)
      if (nd->back) nd->back(*nd);
  }

  static std::shared_ptr<Node> fresh(int rows, int cols) {
    auto n = std::make_shared<Node>();
    n->rows = rows;
    n->cols = cols;
    n->val.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    n->order = next_order();
    return n;
  }

 private:
  static std::uint64_t next_order() {
    static std::uint64_t counter = 0;
    return ++counter;
  }

  std::shared_ptr<Node> n_;
};

namespace tensor_ops {

using Node = Tensor::Node;

inline Tensor make_op(int rows, int cols, std::vector<std::shared_ptr<Node>> parents,
                      std::function<void(Node&)> back) {
  Tensor t = Tensor::leaf(rows, cols, false);
  auto n = t.node();
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  n->parents = std::move(parents);
  if (n->requires_grad) n->back = std::move(back);
  return t;
}

}  // namespace tensor_ops

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dims differ");
  auto an = a.node(), bn = b.node();
  const int r = a.rows(), k = a.cols(), c = b.cols();
  Tensor out = tensor_ops::make_op(r, c, {an, bn}, [an, bn, r, k, c](Tensor::Node& nd) {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) {
        const double g = nd.g(i, j);
        if (g == 0.0) continue;
        for (int t = 0; t < k; ++t) {
          an->g(i, t) += g * bn->v(t, j);
          bn->g(t, j) += g * an->v(i, t);
        }
      }
  });
  auto on = out.node();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      double s = 0;
      for (int t = 0; t < k; ++t) s += an->v(i, t) * bn->v(t, j);
      on->val[static_cast<std::size_t>(i) * c + j] = s;
    }
  return out;
}

inline Tensor transpose(const Tensor& a) {
  auto an = a.node();
  const int r = a.rows(), c = a.cols();
  Tensor out = tensor_ops::make_op(c, r, {an}, [an, r, c](Tensor::Node& nd) {
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < r; ++j) an->g(j, i) += nd.g(i, j);
  });
  auto on = out.node();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) on->val[static_cast<std::size_t>(j) * r + i] = an->v(i, j);
  return out;
}

namespace tensor_ops {

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

}  // namespace tensor_ops

inline Tensor add(const Tensor& a, const Tensor& b) {
  tensor_ops::check_same_shape(a, b, "add");
  auto an = a.node(), bn = b.node();
  Tensor out = tensor_ops::make_op(a.rows(), a.cols(), {an, bn}, [an, bn](Tensor::Node& nd) {
    for (std::size_t i = 0; i < nd.grad.size(); ++i) {
      an->grad[i] += nd.grad[i];
      bn->grad[i] += nd.grad[i];
    }
  });
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = an->val[i] + bn->val[i];
  return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  tensor_ops::check_same_shape(a, b, "sub");
  auto an = a.node(), bn = b.node();
  Tensor out = tensor_ops::make_op(a.rows(), a.cols(), {an, bn}, [an, bn](Tensor::Node& nd) {
    for (std::size_t i = 0; i < nd.grad.size(); ++i) {
      an->grad[i] += nd.grad[i];
      bn->grad[i] -= nd.grad[i];
    }
  });
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = an->val[i] - bn->val[i];
  return out;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  tensor_ops::check_same_shape(a, b, "mul");
  auto an = a.node(), bn = b.node();
  Tensor out = tensor_ops::make_op(a.rows(), a.cols(), {an, bn}, [an, bn](Tensor::Node& nd) {
    for (std::size_t i = 0; i < nd.grad.size(); ++i) {
      an->grad[i] += nd.grad[i] * bn->val[i];
      bn->grad[i] += nd.grad[i] * an->val[i];
    }
  });
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = an->val[i] * bn->val[i];
  return out;
}

inline Tensor div(const Tensor& a, const Tensor& b) {
  tensor_ops::check_same_shape(a, b, "div");
  auto an = a.node(), bn = b.node();
  Tensor out = tensor_ops::make_op(a.rows(), a.cols(), {an, bn}, [an, bn](Tensor::Node& nd) {
    for (std::size_t i = 0; i < nd.grad.size(); ++i) {
      const double inv = 1.0 / bn->val[i];
      an->grad[i] += nd.grad[i] * inv;
      bn->grad[i] -= nd.grad[i] * an->val[i] * inv * inv;
    }
  });
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = an->val[i] / bn->val[i];
  return out;
}

/// M + v broadcast over rows (v is 1 x cols).
inline Tensor add_rowvec(const Tensor& m, const Tensor& v) {
  if (v.rows() != 1 || v.cols() != m.cols()) throw std::invalid_argument("add_rowvec: bad shapes");
  auto mn = m.node(), vn = v.node();
  const int r = m.rows(), c = m.cols();
  Tensor out = tensor_ops::make_op(r, c, {mn, vn}, [mn, vn, r, c](Tensor::Node& nd) {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) {
        mn->g(i, j) += nd.g(i, j);
        vn->grad[static_cast<std::size_t>(j)] += nd.g(i, j);
      }
  });
  auto& ov = out.values();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      ov[static_cast<std::size_t>(i) * c + j] = mn->v(i, j) + vn->val[static_cast<std::size_t>(j)];
  return out;
}

/// M * v broadcast over rows (v is 1 x cols).
inline Tensor mul_rowvec(const Tensor& m, const Tensor& v) {
  if (v.rows() != 1 || v.cols() != m.cols()) throw std::invalid_argument("mul_rowvec: bad shapes");
  auto mn = m.node(), vn = v.node();
  const int r = m.rows(), c = m.cols();
  Tensor out = tensor_ops::make_op(r, c, {mn, vn}, [mn, vn, r, c](Tensor::Node& nd) {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) {
        mn->g(i, j) += nd.g(i, j) * vn->val[static_cast<std::size_t>(j)];
        vn->grad[static_cast<std::size_t>(j)] += nd.g(i, j) * mn->v(i, j);
      }
  });
  auto& ov = out.values();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      ov[static_cast<std::size_t>(i) * c + j] = mn->v(i, j) * vn->val[static_cast<std::size_t>(j)];
  return out;
}

/// M * v broadcast over columns (v is rows x 1).
inline Tensor mul_colvec(const Tensor& m, const Tensor& v) {
  if (v.cols() != 1 || v.rows() != m.rows()) throw std::invalid_argument("mul_colvec: bad shapes");
  auto mn = m.node(), vn = v.node();
  const int r = m.rows(), c = m.cols();
  Tensor out = tensor_ops::make_op(r, c, {mn, vn}, [mn, vn, r, c](Tensor::Node& nd) {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) {
        mn->g(i, j) += nd.g(i, j) * vn->val[static_cast<std::size_t>(i)];
        vn->grad[static_cast<std::size_t>(i)] += nd.g(i, j) * mn->v(i, j);
      }
  });
  auto& ov = out.values();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      ov[static_cast<std::size_t>(i) * c + j] = mn->v(i, j) * vn->val[static_cast<std::size_t>(i)];
  return out;
}

inline Tensor scale(const Tensor& a, double k) {
  auto an = a.node();
  Tensor out = tensor_ops::make_op(a.rows(), a.cols(), {an}, [an, k](Tensor::Node& nd) {
    for (std::size_t i = 0; i < nd.grad.size(); ++i) an->grad[i] += nd.grad[i] * k;
  });
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = an->val[i] * k;
  return out;
}

inline Tensor add_const(const Tensor& a, double k) {
  auto an = a.node();
  Tensor out = tensor_ops::make_op(a.rows(), a.cols(), {an}, [an](Tensor::Node& nd) {
    for (std::size_t i = 0; i < nd.grad.size(); ++i) an->grad[i] += nd.grad[i];
  });
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = an->val[i] + k;
  return out;
}

/// Multiply every entry by a 1x1 tensor (relation priors and the like).
inline Tensor scale_by(const Tensor& a, const Tensor& s) {
  if (s.size() != 1) throw std::invalid_argument("scale_by: scale must be 1x1");
  auto an = a.node(), sn = s.node();
  Tensor out = tensor_ops::make_op(a.rows(), a.cols(), {an, sn}, [an, sn](Tensor::Node& nd) {
    for (std::size_t i = 0; i < nd.grad.size(); ++i) {
      an->grad[i] += nd.grad[i] * sn->val[0];
      sn->grad[0] += nd.grad[i] * an->val[i];
    }
  });
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = an->val[i] * sn->val[0];
  return out;
}

namespace tensor_ops {

template <class F, class G>
Tensor unary(const Tensor& a, F&& f, G&& dfdy) {
  auto an = a.node();
  Tensor out = make_op(a.rows(), a.cols(), {an}, [an, dfdy](Tensor::Node& nd) {
    for (std::size_t i = 0; i < nd.grad.size(); ++i)
      an->grad[i] += nd.grad[i] * dfdy(an->val[i], nd.val[i]);
  });
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(an->val[i]);
  return out;
}

}  // namespace tensor_ops

inline Tensor relu(const Tensor& a) {
  return tensor_ops::unary(
      a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

inline Tensor tanh_f(const Tensor& a) {
  return tensor_ops::unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

inline Tensor sigmoid(const Tensor& a) {
  return tensor_ops::unary(
      a,
      [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
      [](double, double y) { return y * (1.0 - y); });
}

inline Tensor softplus(const Tensor& a) {
  return tensor_ops::unary(
      a,
      [](double x) {
        if (x > 30.0) return x;
        if (x < -30.0) return std::exp(x);
        return std::log1p(std::exp(x));
      },
      [](double x, double) {
        return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      });
}

inline Tensor log_f(const Tensor& a) {
  return tensor_ops::unary(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

inline Tensor exp_f(const Tensor& a) {
  return tensor_ops::unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

inline Tensor sum_all(const Tensor& a) {
  auto an = a.node();
  Tensor out = tensor_ops::make_op(1, 1, {an}, [an](Tensor::Node& nd) {
    for (std::size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += nd.grad[0];
  });
  double s = 0;
  for (double v : an->val) s += v;
  out.values()[0] = s;
  return out;
}

inline Tensor mean_all(const Tensor& a) { return scale(sum_all(a), 1.0 / a.size()); }

inline Tensor row(const Tensor& m, int i) {
  if (i < 0 || i >= m.rows()) throw std::invalid_argument("row: index out of range");
  auto mn = m.node();
  const int c = m.cols();
  Tensor out = tensor_ops::make_op(1, c, {mn}, [mn, i, c](Tensor::Node& nd) {
    for (int j = 0; j < c; ++j) mn->g(i, j) += nd.grad[static_cast<std::size_t>(j)];
  });
  auto& v = out.values();
  for (int j = 0; j < c; ++j) v[static_cast<std::size_t>(j)] = mn->v(i, j);
  return out;
}

inline Tensor gather_rows(const Tensor& m, std::vector<int> idx) {
  auto mn = m.node();
  const int c = m.cols();
  const int k = static_cast<int>(idx.size());
  for (int i : idx)
    if (i < 0 || i >= m.rows()) throw std::invalid_argument("gather_rows: index out of range");
  auto shared_idx = std::make_shared<std::vector<int>>(std::move(idx));
  Tensor out = tensor_ops::make_op(k, c, {mn}, [mn, shared_idx, k, c](Tensor::Node& nd) {
    for (int i = 0; i < k; ++i) {
      const int src = (*shared_idx)[static_cast<std::size_t>(i)];
      for (int j = 0; j < c; ++j) mn->g(src, j) += nd.g(i, j);
    }
  });
  auto& v = out.values();
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < c; ++j)
      v[static_cast<std::size_t>(i) * c + j] = mn->v((*shared_idx)[static_cast<std::size_t>(i)], j);
  return out;
}

inline Tensor slice_cols(const Tensor& m, int c0, int c1) {
  if (c0 < 0 || c1 > m.cols() || c0 >= c1) throw std::invalid_argument("slice_cols: bad range");
  auto mn = m.node();
  const int r = m.rows(), w = c1 - c0;
  Tensor out = tensor_ops::make_op(r, w, {mn}, [mn, c0, r, w](Tensor::Node& nd) {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < w; ++j) mn->g(i, c0 + j) += nd.g(i, j);
  });
  auto& v = out.values();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < w; ++j) v[static_cast<std::size_t>(i) * w + j] = mn->v(i, c0 + j);
  return out;
}

inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  const int r = parts.front().rows();
  int total = 0;
  std::vector<std::shared_ptr<Tensor::Node>> parents;
  for (const auto& p : parts) {
    if (p.rows() != r) throw std::invalid_argument("concat_cols: row mismatch");
    total += p.cols();
    parents.push_back(p.node());
  }
  auto shared_parents = std::make_shared<std::vector<std::shared_ptr<Tensor::Node>>>(parents);
  Tensor out = tensor_ops::make_op(r, total, parents, [shared_parents, r, total](Tensor::Node& nd) {
    int off = 0;
    for (auto& pn : *shared_parents) {
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < pn->cols; ++j) pn->g(i, j) += nd.g(i, off + j);
      off += pn->cols;
    }
  });
  auto& v = out.values();
  int off = 0;
  for (auto& pn : parents) {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < pn->cols; ++j)
        v[static_cast<std::size_t>(i) * total + off + j] = pn->v(i, j);
    off += pn->cols;
  }
  return out;
}

/// Row-wise dot product of two matrices of equal shape: (r x c, r x c) -> r x 1.
inline Tensor rows_dot(const Tensor& a, const Tensor& b) {
  tensor_ops::check_same_shape(a, b, "rows_dot");
  auto an = a.node(), bn = b.node();
  const int r = a.rows(), c = a.cols();
  Tensor out = tensor_ops::make_op(r, 1, {an, bn}, [an, bn, r, c](Tensor::Node& nd) {
    for (int i = 0; i < r; ++i) {
      const double g = nd.grad[static_cast<std::size_t>(i)];
      if (g == 0.0) continue;
      for (int j = 0; j < c; ++j) {
        an->g(i, j) += g * bn->v(i, j);
        bn->g(i, j) += g * an->v(i, j);
      }
    }
  });
  auto& v = out.values();
  for (int i = 0; i < r; ++i) {
    double s = 0;
    for (int j = 0; j < c; ++j) s += an->v(i, j) * bn->v(i, j);
    v[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

/// Softmax over groups of entries of an E x 1 column, grouped by segment id;
/// weights of each group sum to one.
inline Tensor segment_softmax(const Tensor& logits, const std::vector<int>& seg, int num_segments) {
  if (logits.cols() != 1 || static_cast<int>(seg.size()) != logits.rows())
    throw std::invalid_argument("segment_softmax: bad shapes");
  auto ln = logits.node();
  const int e = logits.rows();
  auto shared_seg = std::make_shared<std::vector<int>>(seg);

  Tensor out = tensor_ops::make_op(e, 1, {ln}, [ln, shared_seg, e, num_segments](Tensor::Node& nd) {
    // dx_i = y_i * (dy_i - sum_j in segment y_j dy_j)
    std::vector<double> seg_dot(static_cast<std::size_t>(num_segments), 0.0);
    for (int i = 0; i < e; ++i)
      seg_dot[static_cast<std::size_t>((*shared_seg)[static_cast<std::size_t>(i)])] +=
          nd.val[static_cast<std::size_t>(i)] * nd.grad[static_cast<std::size_t>(i)];
    for (int i = 0; i < e; ++i)
      ln->grad[static_cast<std::size_t>(i)] +=
          nd.val[static_cast<std::size_t>(i)] *
          (nd.grad[static_cast<std::size_t>(i)] -
           seg_dot[static_cast<std::size_t>((*shared_seg)[static_cast<std::size_t>(i)])]);
  });

  auto& y = out.values();
  std::vector<double> seg_max(static_cast<std::size_t>(num_segments), -kInf);
  for (int i = 0; i < e; ++i) {
    auto s = static_cast<std::size_t>(seg[static_cast<std::size_t>(i)]);
    seg_max[s] = std::max(seg_max[s], ln->val[static_cast<std::size_t>(i)]);
  }
  std::vector<double> seg_sum(static_cast<std::size_t>(num_segments), 0.0);
  for (int i = 0; i < e; ++i) {
    auto s = static_cast<std::size_t>(seg[static_cast<std::size_t>(i)]);
    y[static_cast<std::size_t>(i)] = std::exp(ln->val[static_cast<std::size_t>(i)] - seg_max[s]);
    seg_sum[s] += y[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < e; ++i)
    y[static_cast<std::size_t>(i)] /= seg_sum[static_cast<std::size_t>(seg[static_cast<std::size_t>(i)])];
  return out;
}

/// Sums rows of values into their segment: (E x c) -> (num_segments x c).
inline Tensor segment_sum(const Tensor& values, const std::vector<int>& seg, int num_segments) {
  if (static_cast<int>(seg.size()) != values.rows())
    throw std::invalid_argument("segment_sum: bad shapes");
  auto vn = values.node();
  const int e = values.rows(), c = values.cols();
  auto shared_seg = std::make_shared<std::vector<int>>(seg);
  Tensor out = tensor_ops::make_op(num_segments, c, {vn}, [vn, shared_seg, e, c](Tensor::Node& nd) {
    for (int i = 0; i < e; ++i) {
      const int s = (*shared_seg)[static_cast<std::size_t>(i)];
      for (int j = 0; j < c; ++j) vn->g(i, j) += nd.g(s, j);
    }
  });
  auto& v = out.values();
  for (int i = 0; i < e; ++i) {
    const int s = seg[static_cast<std::size_t>(i)];
    for (int j = 0; j < c; ++j) v[static_cast<std::size_t>(s) * c + j] += vn->v(i, j);
  }
  return out;
}

/// Softmax over an L x 1 column with hard masking: masked entries come out
/// exactly zero and receive no gradient.
inline Tensor masked_softmax(const Tensor& logits, const std::vector<bool>& masked) {
  if (logits.cols() != 1 || static_cast<int>(masked.size()) != logits.rows())
    throw std::invalid_argument("masked_softmax: bad shapes");
  auto ln = logits.node();
  const int e = logits.rows();
  auto shared_mask = std::make_shared<std::vector<bool>>(masked);

  Tensor out = tensor_ops::make_op(e, 1, {ln}, [ln, shared_mask, e](Tensor::Node& nd) {
    double dot = 0;
    for (int i = 0; i < e; ++i)
      dot += nd.val[static_cast<std::size_t>(i)] * nd.grad[static_cast<std::size_t>(i)];
    for (int i = 0; i < e; ++i) {
      if ((*shared_mask)[static_cast<std::size_t>(i)]) continue;
      ln->grad[static_cast<std::size_t>(i)] +=
          nd.val[static_cast<std::size_t>(i)] * (nd.grad[static_cast<std::size_t>(i)] - dot);
    }
  });

  auto& y = out.values();
  double mx = -kInf;
  bool any = false;
  for (int i = 0; i < e; ++i)
    if (!masked[static_cast<std::size_t>(i)]) {
      mx = std::max(mx, ln->val[static_cast<std::size_t>(i)]);
      any = true;
    }
  if (!any) throw std::invalid_argument("masked_softmax: all entries masked");
  double sum = 0;
  for (int i = 0; i < e; ++i) {
    if (masked[static_cast<std::size_t>(i)]) {
      y[static_cast<std::size_t>(i)] = 0.0;
    } else {
      y[static_cast<std::size_t>(i)] = std::exp(ln->val[static_cast<std::size_t>(i)] - mx);
      sum += y[static_cast<std::size_t>(i)];
    }
  }
  for (int i = 0; i < e; ++i)
    if (!masked[static_cast<std::size_t>(i)]) y[static_cast<std::size_t>(i)] /= sum;
  return out;
}

/// Picks one entry by flat index as a 1x1 tensor.
inline Tensor pick(const Tensor& a, int flat_index) {
  if (flat_index < 0 || flat_index >= a.size()) throw std::invalid_argument("pick: out of range");
  auto an = a.node();
  Tensor out = tensor_ops::make_op(1, 1, {an}, [an, flat_index](Tensor::Node& nd) {
    an->grad[static_cast<std::size_t>(flat_index)] += nd.grad[0];
  });
  out.values()[0] = an->val[static_cast<std::size_t>(flat_index)];
  return out;
}

}  // namespace cutsel
