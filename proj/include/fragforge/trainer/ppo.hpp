#pragma once

#include <span>
#include <vector>

#include "fragforge/env/environment.hpp"
#include "fragforge/nn/graph.hpp"
#include "fragforge/nn/parameters.hpp"
#include "fragforge/policy/model.hpp"

namespace fragforge::trainer {

struct PPOConfig {
  double clip_epsilon = 0.2;
  double max_grad_norm = 0.5;
  double gae_lambda = 0.97;
  double value_coef = 0.5;    // c1
  double entropy_coef = 0.01;  // c2
  int epochs = 5;
  double learning_rate = 3e-4;
  double gamma = 1.0;
  int minibatch_size = 100;
  int workers = 8;
  long total_steps = 50000;
  long eval_interval = 1000;
  long eval_start = 100;
  long segment_steps = 2048;  // environment steps collected per update
  bool normalize_advantages = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int grad_chunks = 8;  // fixed split of each minibatch; results do not depend on thread count

  bool operator==(const PPOConfig&) const = default;
  void validate() const;
};

struct Transition {
  env::EnvState state;
  env::Action action;
  double log_prob = 0.0;  // under the collecting parameters
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
  double advantage = 0.0;
  double target = 0.0;
  int worker = 0;
};

struct LossParts {
  double total = 0.0;
  double policy = 0.0;   // -E[min(r A, clip(r) A)]
  double value = 0.0;    // E[(V - V_target)^2]
  double entropy = 0.0;  // E[H]
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// Clipped surrogate for a single sample: min(r A, clip(r, 1 - eps, 1 + eps) A).
nn::Var clipped_surrogate(nn::Graph& g, nn::Var ratio, double advantage, double epsilon);

// Loss -J for one transition; `parts` receives its unscaled components.
nn::Var ppo_sample_loss(nn::Graph& g, const policy::PolicyModel& model, const Transition& t,
                        const PPOConfig& cfg, LossParts& parts, double bond_factor);

// Mean loss over `batch`; with `grads` non-null, adds the gradient of that mean
// into it. Throws Error on a non-finite loss.
LossParts ppo_objective(const policy::PolicyModel& model, std::span<const Transition* const> batch,
                        const PPOConfig& cfg, nn::Gradients* grads,
                        double bond_factor = chem::kDefaultBondFactor);

class Adam {
 public:
  Adam(const nn::ParameterSet& params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(nn::ParameterSet& params, const nn::Gradients& grads);
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<nn::Tensor> m_, v_;
};

}  // namespace fragforge::trainer
