#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "fragforge/nn/checkpoint.hpp"
#include "fragforge/nn/layers.hpp"
#include "fragforge/nn/parameters.hpp"

namespace fragforge::policy {

struct ModelConfig {
  nn::EmbedderConfig embedder;  // shared by MolNet and FragNet, separate weights
  int hidden = 128;
  int hidden_layers = 2;
  int multiset_features = 64;  // width of h_F
  int n_fragments = 0;         // catalog size m
  double min_distance = 1.10;
  double max_distance = 2.10;
  double sigma_distance = 0.05;
  double sigma_angle = 0.2;
  double logit_gain = 0.01;  // output-layer gain of the policy heads
  std::uint64_t seed = 0;

  bool operator==(const ModelConfig&) const = default;

  std::map<std::string, std::string> to_metadata() const;
  static ModelConfig from_metadata(const std::map<std::string, std::string>& meta);
};

// Actor and critic weights. The critic shares MolNet and the multiset MLP with
// the actor and owns only its value head.
class PolicyModel {
 public:
  explicit PolicyModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const nn::ParameterSet& params() const { return params_; }
  nn::ParameterSet& params() { return params_; }

  nn::Embedder molnet;
  nn::Embedder fragnet;
  nn::Mlp mlp_multiset;  // x_F -> h_F
  nn::Mlp mlp_v;         // [h_v, h_F] -> logit
  nn::Mlp mlp_f;         // [h_vM, h_F] -> m logits
  nn::Mlp mlp_u;         // [h_u, h_vM, h_F, x_f] -> logit
  nn::Mlp mlp_d;         // [h_uf, h_vM, h_F, x_f] -> distance mean (pre-rescale)
  nn::Mlp mlp_phi;       // same input -> |phi| mean (pre-rescale)
  nn::Mlp mlp_sign;      // same input -> sign logit
  nn::Mlp mlp_value;     // [sum h_v, h_F] -> V

  nn::Checkpoint to_checkpoint(std::map<std::string, std::string> extra = {}) const;
  // Rebuilds the model from the stored config and copies the stored weights.
  static PolicyModel from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  ModelConfig config_;
  nn::ParameterSet params_;
};

}  // namespace fragforge::policy
