#include "socnav/autodiff.hpp"

#include <cmath>
#include <unordered_set>
#include <utility>

namespace socnav::ad {

namespace detail {

void Node::accumulate(const Mat& g) {
  if (!requires_grad) return;
  if (has_grad) {
    grad += g;
  } else {
    grad = g;
    has_grad = true;
  }
}

}  // namespace detail

using detail::Node;

namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

Tensor make_node(Mat value, const char* op, std::vector<std::shared_ptr<Node>> parents,
                 std::function<void(Node&)> backprop) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = op;
  bool any_grad = false;
  for (const auto& p : parents) any_grad = any_grad || p->requires_grad;
  if (any_grad) {
    // Constants are cut out of the history; inference builds no reverse graph.
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backprop = std::move(backprop);
  }
  return Tensor(std::move(node));
}

void check_index(const std::vector<int>& index, int n_segments, const char* op) {
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] < 0 || index[k] >= n_segments) {
      throw BoundsError(std::string(op) + ": index[" + std::to_string(k) + "] = " +
                            std::to_string(index[k]) + " outside [0, " +
                            std::to_string(n_segments) + ")",
                        op);
    }
  }
}

}  // namespace

// ---- Tensor -----------------------------------------------------------------

Tensor Tensor::leaf(Mat value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  Mat m(1, 1);
  m(0, 0) = v;
  return leaf(std::move(m), requires_grad);
}

Tensor Tensor::column(const std::vector<double>& v, bool requires_grad) {
  Mat m(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
  return leaf(std::move(m), requires_grad);
}

const Mat& Tensor::value() const {
  if (!node_) throw DimensionError("use of undefined tensor");
  return node_->value;
}

Mat& Tensor::value_mut() {
  if (!node_) throw DimensionError("use of undefined tensor");
  return node_->value;
}

const Mat& Tensor::grad() const {
  if (!node_ || !node_->has_grad) throw NumericError("tensor has no gradient; run backward first");
  return node_->grad;
}

bool Tensor::has_grad() const noexcept { return node_ && node_->has_grad; }

bool Tensor::requires_grad() const noexcept { return node_ && node_->requires_grad; }

void Tensor::zero_grad() {
  if (!node_) return;
  node_->has_grad = false;
  node_->grad.resize(0, 0);
}

bool Tensor::is_leaf() const { return node_ && node_->parents.empty() && !node_->backprop; }

double Tensor::item() const {
  if (rows() != 1 || cols() != 1)
    throw DimensionError("item() requires a 1x1 tensor, got " + shape_str(*this));
  return value()(0, 0);
}

// ---- Tape -------------------------------------------------------------------

Tape::Tape(const Tensor& root) : root_(root) {
  if (!root.defined()) throw DimensionError("tape root is undefined");
  Node* r = root.node();
  if (!r->requires_grad) return;  // constant root: empty record

  struct Frame {
    Node* n;
    std::size_t next = 0;
  };
  std::unordered_set<Node*> seen;
  std::vector<Frame> stack;
  stack.push_back({r});
  seen.insert(r);
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.n->parents.size()) {
      Node* p = f.n->parents[f.next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p});
    } else {
      order_.push_back(f.n);
      stack.pop_back();
    }
  }
}

void Tape::backward() {
  if (root_.rows() != 1 || root_.cols() != 1)
    throw DimensionError("backward requires a scalar root, got " + shape_str(root_));
  if (order_.empty()) return;
  root_.node()->accumulate(Mat::Ones(1, 1));
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    Node* n = *it;
    if (!n->has_grad) {
      n->grad = Mat::Zero(n->value.rows(), n->value.cols());
      n->has_grad = true;
    }
    if (n->backprop) n->backprop(*n);
  }
}

void backward(const Tensor& loss) { Tape(loss).backward(); }

// ---- primitives -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a) + " vs " + shape_str(b));
  Mat y = a.value() * b.value();
  Node* pa = a.node();
  Node* pb = b.node();
  return make_node(std::move(y), "matmul", {a.node_ptr(), b.node_ptr()}, [pa, pb](Node& self) {
    if (pa->requires_grad) pa->accumulate(self.grad * pb->value.transpose());
    if (pb->requires_grad) pb->accumulate(pa->value.transpose() * self.grad);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("add: shape mismatch, " + shape_str(a) + " vs " + shape_str(b));
  Mat y = a.value() + b.value();
  Node* pa = a.node();
  Node* pb = b.node();
  return make_node(std::move(y), "add", {a.node_ptr(), b.node_ptr()}, [pa, pb](Node& self) {
    pa->accumulate(self.grad);
    pb->accumulate(self.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("sub: shape mismatch, " + shape_str(a) + " vs " + shape_str(b));
  Mat y = a.value() - b.value();
  Node* pa = a.node();
  Node* pb = b.node();
  return make_node(std::move(y), "sub", {a.node_ptr(), b.node_ptr()}, [pa, pb](Node& self) {
    pa->accumulate(self.grad);
    if (pb->requires_grad) pb->accumulate(-self.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("mul: shape mismatch, " + shape_str(a) + " vs " + shape_str(b));
  Mat y = a.value().cwiseProduct(b.value());
  Node* pa = a.node();
  Node* pb = b.node();
  return make_node(std::move(y), "mul", {a.node_ptr(), b.node_ptr()}, [pa, pb](Node& self) {
    if (pa->requires_grad) pa->accumulate(self.grad.cwiseProduct(pb->value));
    if (pb->requires_grad) pb->accumulate(self.grad.cwiseProduct(pa->value));
  });
}

Tensor scale(const Tensor& x, double s) {
  Mat y = x.value() * s;
  Node* px = x.node();
  return make_node(std::move(y), "scale", {x.node_ptr()},
                   [px, s](Node& self) { px->accumulate(self.grad * s); });
}

Tensor add_scalar(const Tensor& x, double c) {
  Mat y = x.value().array() + c;
  Node* px = x.node();
  return make_node(std::move(y), "add_scalar", {x.node_ptr()},
                   [px](Node& self) { px->accumulate(self.grad); });
}

Tensor add_rowwise(const Tensor& x, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols())
    throw DimensionError("add_rowwise: bias must be 1x" + std::to_string(x.cols()) + ", got " +
                         shape_str(bias));
  Mat y = x.value().rowwise() + bias.value().row(0);
  Node* px = x.node();
  Node* pb = bias.node();
  return make_node(std::move(y), "add_rowwise", {x.node_ptr(), bias.node_ptr()},
                   [px, pb](Node& self) {
                     px->accumulate(self.grad);
                     if (pb->requires_grad) pb->accumulate(self.grad.colwise().sum());
                   });
}

Tensor scale_rows(const Tensor& x, const Tensor& s) {
  if (s.cols() != 1 || s.rows() != x.rows())
    throw DimensionError("scale_rows: scales must be " + std::to_string(x.rows()) + "x1, got " +
                         shape_str(s));
  Mat y = x.value().array().colwise() * s.value().col(0).array();
  Node* px = x.node();
  Node* ps = s.node();
  return make_node(std::move(y), "scale_rows", {x.node_ptr(), s.node_ptr()}, [px, ps](Node& self) {
    if (px->requires_grad)
      px->accumulate(self.grad.array().colwise() * ps->value.col(0).array());
    if (ps->requires_grad)
      ps->accumulate(self.grad.cwiseProduct(px->value).rowwise().sum());
  });
}

Tensor relu(const Tensor& x) {
  Mat y = x.value().cwiseMax(0.0);
  Node* px = x.node();
  return make_node(std::move(y), "relu", {x.node_ptr()}, [px](Node& self) {
    px->accumulate((px->value.array() > 0.0).select(self.grad, Mat::Zero(self.grad.rows(), self.grad.cols())));
  });
}

Tensor leaky_relu(const Tensor& x, double alpha) {
  Mat y = (x.value().array() > 0.0).select(x.value(), x.value() * alpha);
  Node* px = x.node();
  return make_node(std::move(y), "leaky_relu", {x.node_ptr()}, [px, alpha](Node& self) {
    px->accumulate((px->value.array() > 0.0).select(self.grad, self.grad * alpha));
  });
}

Tensor sigmoid(const Tensor& x) {
  Mat y = x.value().unaryExpr([](double v) {
    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  });
  Node* px = x.node();
  return make_node(std::move(y), "sigmoid", {x.node_ptr()}, [px](Node& self) {
    px->accumulate(self.grad.cwiseProduct(
        self.value.cwiseProduct(Mat::Ones(self.value.rows(), self.value.cols()) - self.value)));
  });
}

Tensor tanh(const Tensor& x) {
  Mat y = x.value().array().tanh();
  Node* px = x.node();
  return make_node(std::move(y), "tanh", {x.node_ptr()}, [px](Node& self) {
    px->accumulate(self.grad.cwiseProduct(
        (Mat::Ones(self.value.rows(), self.value.cols()) - self.value.cwiseProduct(self.value))));
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows())
    throw DimensionError("concat_cols: row counts differ, " + shape_str(a) + " vs " + shape_str(b));
  Mat y(a.rows(), a.cols() + b.cols());
  y.leftCols(a.cols()) = a.value();
  y.rightCols(b.cols()) = b.value();
  Node* pa = a.node();
  Node* pb = b.node();
  const Eigen::Index ca = a.cols();
  const Eigen::Index cb = b.cols();
  return make_node(std::move(y), "concat_cols", {a.node_ptr(), b.node_ptr()},
                   [pa, pb, ca, cb](Node& self) {
                     if (pa->requires_grad) pa->accumulate(self.grad.leftCols(ca));
                     if (pb->requires_grad) pb->accumulate(self.grad.rightCols(cb));
                   });
}

Tensor gather_rows(const Tensor& x, const std::vector<int>& index) {
  check_index(index, static_cast<int>(x.rows()), "gather_rows");
  Mat y(static_cast<Eigen::Index>(index.size()), x.cols());
  for (std::size_t k = 0; k < index.size(); ++k)
    y.row(static_cast<Eigen::Index>(k)) = x.value().row(index[k]);
  Node* px = x.node();
  return make_node(std::move(y), "gather_rows", {x.node_ptr()}, [px, index](Node& self) {
    Mat g = Mat::Zero(px->value.rows(), px->value.cols());
    for (std::size_t k = 0; k < index.size(); ++k)
      g.row(index[k]) += self.grad.row(static_cast<Eigen::Index>(k));
    px->accumulate(g);
  });
}

Tensor scatter_sum(const Tensor& values, const std::vector<int>& index, int n_segments) {
  if (n_segments < 0) throw DimensionError("scatter_sum: negative segment count");
  if (static_cast<Eigen::Index>(index.size()) != values.rows())
    throw DimensionError("scatter_sum: index length " + std::to_string(index.size()) +
                         " does not match values rows " + std::to_string(values.rows()));
  check_index(index, n_segments, "scatter_sum");
  Mat y = Mat::Zero(n_segments, values.cols());
  for (std::size_t k = 0; k < index.size(); ++k)
    y.row(index[k]) += values.value().row(static_cast<Eigen::Index>(k));
  Node* pv = values.node();
  return make_node(std::move(y), "scatter_sum", {values.node_ptr()}, [pv, index](Node& self) {
    Mat g(static_cast<Eigen::Index>(index.size()), self.grad.cols());
    for (std::size_t k = 0; k < index.size(); ++k)
      g.row(static_cast<Eigen::Index>(k)) = self.grad.row(index[k]);
    pv->accumulate(g);
  });
}

Tensor segment_softmax(const Tensor& logits, const std::vector<int>& index, int n_segments) {
  if (logits.cols() != 1)
    throw DimensionError("segment_softmax: logits must be a column, got " + shape_str(logits));
  if (static_cast<Eigen::Index>(index.size()) != logits.rows())
    throw DimensionError("segment_softmax: index length " + std::to_string(index.size()) +
                         " does not match logits rows " + std::to_string(logits.rows()));
  check_index(index, n_segments, "segment_softmax");

  const Eigen::Index m = logits.rows();
  Eigen::VectorXd seg_max = Eigen::VectorXd::Constant(n_segments, -std::numeric_limits<double>::infinity());
  for (Eigen::Index k = 0; k < m; ++k)
    seg_max[index[static_cast<std::size_t>(k)]] =
        std::max(seg_max[index[static_cast<std::size_t>(k)]], logits.value()(k, 0));
  Mat y(m, 1);
  Eigen::VectorXd seg_sum = Eigen::VectorXd::Zero(n_segments);
  for (Eigen::Index k = 0; k < m; ++k) {
    y(k, 0) = std::exp(logits.value()(k, 0) - seg_max[index[static_cast<std::size_t>(k)]]);
    seg_sum[index[static_cast<std::size_t>(k)]] += y(k, 0);
  }
  for (Eigen::Index k = 0; k < m; ++k) y(k, 0) /= seg_sum[index[static_cast<std::size_t>(k)]];

  Node* pl = logits.node();
  const int n = n_segments;
  return make_node(std::move(y), "segment_softmax", {logits.node_ptr()}, [pl, index, n](Node& self) {
    // d logit_k = attn_k * (g_k - sum over k's segment of attn_j * g_j)
    Eigen::VectorXd seg_dot = Eigen::VectorXd::Zero(n);
    const Eigen::Index m = self.value.rows();
    for (Eigen::Index k = 0; k < m; ++k)
      seg_dot[index[static_cast<std::size_t>(k)]] += self.value(k, 0) * self.grad(k, 0);
    Mat g(m, 1);
    for (Eigen::Index k = 0; k < m; ++k)
      g(k, 0) = self.value(k, 0) * (self.grad(k, 0) - seg_dot[index[static_cast<std::size_t>(k)]]);
    pl->accumulate(g);
  });
}

Tensor sum_all(const Tensor& x) {
  Mat y(1, 1);
  y(0, 0) = x.value().sum();
  Node* px = x.node();
  return make_node(std::move(y), "sum_all", {x.node_ptr()}, [px](Node& self) {
    px->accumulate(Mat::Constant(px->value.rows(), px->value.cols(), self.grad(0, 0)));
  });
}

Tensor mean_all(const Tensor& x) {
  if (x.numel() == 0) throw DimensionError("mean_all: empty tensor");
  Mat y(1, 1);
  y(0, 0) = x.value().mean();
  Node* px = x.node();
  const double inv_n = 1.0 / static_cast<double>(x.numel());
  return make_node(std::move(y), "mean_all", {x.node_ptr()}, [px, inv_n](Node& self) {
    px->accumulate(Mat::Constant(px->value.rows(), px->value.cols(), self.grad(0, 0) * inv_n));
  });
}

Tensor linear_forward(const Tensor& x, const Tensor& W, const Tensor& b) {
  if (x.cols() != W.rows())
    throw DimensionError("linear_forward: x is " + shape_str(x) + " but W is " + shape_str(W));
  if (b.rows() != 1 || b.cols() != W.cols())
    throw DimensionError("linear_forward: b must be 1x" + std::to_string(W.cols()) + ", got " +
                         shape_str(b));
  return add_rowwise(matmul(x, W), b);
}

Tensor mse_loss(const Tensor& predictions, const std::vector<double>& labels) {
  if (labels.empty()) throw ConfigError("mse_loss: empty input");
  if (predictions.cols() != 1 || predictions.rows() != static_cast<Eigen::Index>(labels.size()))
    throw DimensionError("mse_loss: predictions must be " + std::to_string(labels.size()) +
                         "x1, got " + shape_str(predictions));
  Tensor target = Tensor::column(labels);
  Tensor diff = sub(predictions, target);
  return mean_all(mul(diff, diff));
}

Tensor dropout(const Tensor& x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout: rate must be in [0, 1)");
  if (rate == 0.0) return x;
  Mat mask(x.rows(), x.cols());
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      mask(i, j) = rng.uniform() >= rate ? keep : 0.0;
  return mul(x, Tensor::leaf(std::move(mask)));
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps) {
  if (!(eps > 0.0) || eps > 1e-3) throw ConfigError("grad_check: eps must be in (0, 1e-3]");
  if (!x.is_leaf() || !x.requires_grad())
    throw ConfigError("grad_check: x must be a requires_grad leaf");

  Tensor probe = x;
  probe.zero_grad();
  Tensor out = f(probe);
  if (out.rows() != 1 || out.cols() != 1)
    throw DimensionError("grad_check: f must return a scalar, got " + shape_str(out));
  if (!std::isfinite(out.item())) throw NumericError("grad_check: f evaluated to a non-finite value");
  backward(out);
  Mat analytic = probe.has_grad() ? probe.grad() : Mat::Zero(probe.rows(), probe.cols());

  auto eval = [&](void) -> double {
    Tensor y = f(probe);
    const double v = y.item();
    if (!std::isfinite(v)) throw NumericError("grad_check: f evaluated to a non-finite value");
    return v;
  };

  double max_rel = 0.0;
  Mat& xv = probe.value_mut();
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    for (Eigen::Index j = 0; j < xv.cols(); ++j) {
      const double saved = xv(i, j);
      xv(i, j) = saved + eps;
      const double fp = eval();
      xv(i, j) = saved - eps;
      const double fm = eval();
      xv(i, j) = saved;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double denom = std::max({std::abs(analytic(i, j)), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::abs(analytic(i, j) - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace socnav::ad
