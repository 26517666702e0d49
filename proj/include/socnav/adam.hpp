#pragma once

#include <span>
#include <string>
#include <vector>

#include "socnav/autodiff.hpp"

namespace socnav {

// A learnable tensor with a stable name (used in checkpoints and error
// messages, e.g. "layer2.gat.head1.W").
struct Param {
  std::string name;
  ad::Tensor tensor;
};

// First/second moment estimates, one slot per parameter, plus the shared
// step counter. Zero-initialized at t = 0; slots are shaped on first use.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long t = 0;
  std::vector<ad::Mat> m;
  std::vector<ad::Mat> v;
};

// One Adam update with bias correction. Weight decay is coupled L2: the
// decay term is added to the gradient before the moment updates. Parameters
// whose gradient was never populated (e.g. a relation unused by the current
// batch) step with a zero gradient. Throws NumericError naming the parameter
// on a non-finite gradient.
void adam_step(std::span<Param> params, AdamState& state, double lr, double weight_decay);

}  // namespace socnav
