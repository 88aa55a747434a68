#pragma once

#include <vector>

namespace fragforge::trainer {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> targets;  // advantage + value
};

// Generalized advantage estimation over one worker's contiguous transitions.
// delta_t = r_t + gamma V(s_{t+1}) (1 - done_t) - V(s_t), with V(s_n) =
// bootstrap_value for a segment that ends mid-episode. Episode boundaries
// (done_t) cut both the bootstrap and the lambda sum.
GaeResult gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                         const std::vector<bool>& dones, double gamma, double lambda,
                         double bootstrap_value = 0.0);

}  // namespace fragforge::trainer
