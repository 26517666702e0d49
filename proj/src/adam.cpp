#include "socnav/adam.hpp"

#include <cmath>

namespace socnav {

void adam_step(std::span<Param> params, AdamState& state, double lr, double weight_decay) {
  using ad::Mat;

  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Mat& value = params[i].tensor.value();
      state.m[i] = Mat::Zero(value.rows(), value.cols());
      state.v[i] = Mat::Zero(value.rows(), value.cols());
    }
  }
  if (state.m.size() != params.size())
    throw DimensionError("adam_step: state tracks " + std::to_string(state.m.size()) +
                         " parameters, got " + std::to_string(params.size()));

  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));

  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = params[i];
    Mat& value = p.tensor.value_mut();
    if (state.m[i].rows() != value.rows() || state.m[i].cols() != value.cols())
      throw DimensionError("adam_step: state shape mismatch", p.name);

    Mat g = p.tensor.has_grad() ? p.tensor.grad() : Mat::Zero(value.rows(), value.cols());
    if (!g.allFinite()) throw NumericError("adam_step: non-finite gradient", p.name);
    if (weight_decay != 0.0) g += weight_decay * value;

    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g.cwiseProduct(g);
    const Mat m_hat = state.m[i] / bc1;
    const Mat v_hat = state.v[i] / bc2;
    value.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + state.epsilon);
  }
}

}  // namespace socnav
