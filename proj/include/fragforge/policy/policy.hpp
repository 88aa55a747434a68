#pragma once

#include <array>
#include <random>
#include <vector>

#include "fragforge/env/environment.hpp"
#include "fragforge/nn/graph.hpp"
#include "fragforge/policy/model.hpp"

namespace fragforge::policy {

struct HeadLogProbs {
  double molecule_hydrogen = 0.0;
  double fragment = 0.0;
  double fragment_hydrogen = 0.0;
  double distance = 0.0;
  double angle = 0.0;
  double sign = 0.0;

  double total() const {
    return molecule_hydrogen + fragment + fragment_hydrogen + distance + angle + sign;
  }
};

struct SampledAction {
  env::Action action;
  double log_prob = 0.0;  // equals heads.total()
  HeadLogProbs heads;
};

struct ActionEvaluation {
  double log_prob = 0.0;
  double entropy = 0.0;  // categorical heads only
};

struct ContinuousParameters {
  double mean_distance = 0.0;
  double mean_angle = 0.0;
  double p_sign = 0.5;  // probability of sign +1
};

// Everything one forward pass produces, still attached to the graph so a loss
// can be built on top of it.
struct PolicyTrace {
  env::Action action;
  HeadLogProbs heads;
  nn::Var log_prob;  // 1 x 1
  std::array<nn::Var, 6> head_log_probs;  // v, f, u, d, |phi|, sign
  nn::Var entropy;   // 1 x 1
  nn::Var value;     // 1 x 1, only when requested
  std::vector<double> p_molecule_hydrogen;
  std::vector<double> p_fragment;
  std::vector<double> p_fragment_hydrogen;
  ContinuousParameters continuous;
};

// Runs the hierarchical actor on `state`. With `given` set, scores that action
// (throwing env::IllegalAction if it violates the masks or bounds); otherwise
// samples each sub-action in turn from `rng`, or takes the most likely choice
// and the means when `rng` is null.
PolicyTrace trace_policy(nn::Graph& g, const PolicyModel& model, const env::EnvState& state,
                         const env::Action* given, std::mt19937_64* rng, bool with_value,
                         double bond_factor = chem::kDefaultBondFactor);

SampledAction sample_action(const PolicyModel& model, const env::EnvState& state, std::mt19937_64& rng,
                            double bond_factor = chem::kDefaultBondFactor);
// Mode of every head: argmax selections, mean distance and angle, likelier sign.
SampledAction greedy_action(const PolicyModel& model, const env::EnvState& state,
                            double bond_factor = chem::kDefaultBondFactor);
ActionEvaluation evaluate_action(const PolicyModel& model, const env::EnvState& state,
                                 const env::Action& action, double bond_factor = chem::kDefaultBondFactor);
double state_value(const PolicyModel& model, const env::EnvState& state);

// Individual heads, conditioned on the upstream selections. Masked entries
// carry probability exactly 0.
std::vector<double> molecule_hydrogen_distribution(const PolicyModel& model, const env::EnvState& state,
                                                   double bond_factor = chem::kDefaultBondFactor);
std::vector<double> fragment_distribution(const PolicyModel& model, const env::EnvState& state,
                                          std::size_t molecule_hydrogen);
std::vector<double> fragment_hydrogen_distribution(const PolicyModel& model, const env::EnvState& state,
                                                   std::size_t molecule_hydrogen, std::size_t fragment);
ContinuousParameters continuous_parameters(const PolicyModel& model, const env::EnvState& state,
                                           std::size_t molecule_hydrogen, std::size_t fragment,
                                           std::size_t fragment_hydrogen);

// Softmax restricted to the unmasked entries. Throws if everything is masked.
std::vector<double> masked_probabilities(const nn::Tensor& logits, const std::vector<bool>& mask);

// Draws from N(mean, sigma^2) restricted to [lo, hi]: rejection sampling for
// 100 tries, then the clamped last draw.
double sample_truncated_normal(std::mt19937_64& rng, double mean, double sigma, double lo, double hi);

}  // namespace fragforge::policy
