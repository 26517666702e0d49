#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "socnav/errors.hpp"
#include "socnav/rng.hpp"

namespace socnav::ad {

// All numerics are dense row-major 64-bit matrices. Rank-1 data travels as
// n x 1 or 1 x n; scalars as 1 x 1.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

struct Node {
  Mat value;
  Mat grad;  // allocated on first accumulation
  bool requires_grad = false;
  bool has_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // distributes this->grad to parents

  void accumulate(const Mat& g);
};

}  // namespace detail

// Value handle over an immutable-once-created node. Copies share the node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor leaf(Mat value, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  // Column vector leaf from a list of values.
  static Tensor column(const std::vector<double>& v, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Mat& value() const;
  // Mutable access to a leaf's payload (optimizer updates, finite differences).
  Mat& value_mut();
  const Mat& grad() const;
  bool has_grad() const noexcept;
  bool requires_grad() const noexcept;
  void zero_grad();

  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  std::array<Eigen::Index, 2> shape() const { return {rows(), cols()}; }
  Eigen::Index numel() const { return value().size(); }
  bool is_leaf() const;
  double item() const;  // 1x1 only

  detail::Node* node() const noexcept { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const noexcept { return node_; }

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Ordered record of the operations a value depends on: every node appears
// after all of its inputs. backward() replays the record in reverse, so each
// node is processed only after every consumer has contributed its gradient,
// and every requires_grad leaf reachable from the root ends up with a grad.
class Tape {
 public:
  explicit Tape(const Tensor& root);
  void backward();
  std::size_t size() const noexcept { return order_.size(); }

 private:
  Tensor root_;
  std::vector<detail::Node*> order_;
};

// Convenience: build the tape for `loss` (a 1x1 tensor) and run it backward.
void backward(const Tensor& loss);

// ---- primitives ------------------------------------------------------------
// Each op validates shapes, computes the forward value eagerly, and records
// the reverse rule. Results of all-constant inputs carry no history.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& x, double s);
Tensor add_scalar(const Tensor& x, double c);
// y[i, :] = x[i, :] + bias, bias is 1 x d.
Tensor add_rowwise(const Tensor& x, const Tensor& bias);
// y[i, :] = x[i, :] * s[i, 0], s is m x 1.
Tensor scale_rows(const Tensor& x, const Tensor& s);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double alpha);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor concat_cols(const Tensor& a, const Tensor& b);
// y[k, :] = x[index[k], :].
Tensor gather_rows(const Tensor& x, const std::vector<int>& index);
// out[i, :] = sum of values rows with index == i; empty segments are zero.
Tensor scatter_sum(const Tensor& values, const std::vector<int>& index, int n_segments);
// Per-segment softmax over an m x 1 logit column, max-subtracted for
// stability. Segments with no members produce no outputs.
Tensor segment_softmax(const Tensor& logits, const std::vector<int>& index, int n_segments);
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

// y = x W + b with x: n x d_in, W: d_in x d_out, b: 1 x d_out.
Tensor linear_forward(const Tensor& x, const Tensor& W, const Tensor& b);

// Mean squared error between an m x 1 prediction column and labels.
Tensor mse_loss(const Tensor& predictions, const std::vector<double>& labels);

// Inverted dropout; identity at rate 0. Draws one uniform per entry.
Tensor dropout(const Tensor& x, double rate, Rng& rng);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& x) { return scale(x, s); }
inline Tensor operator*(const Tensor& x, double s) { return scale(x, s); }

// Compares the tape gradient of a scalar-valued f at leaf x against central
// finite differences, coordinate by coordinate. Returns the max relative
// error with denominator max(|analytic|, |numeric|, 1e-8).
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps);

}  // namespace socnav::ad
