#include "fragforge/policy/model.hpp"

#include <charconv>
#include <random>
#include <sstream>

#include "fragforge/error.hpp"

namespace fragforge::policy {

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

template <typename T>
T parse_number(const std::map<std::string, std::string>& meta, const std::string& key) {
  auto it = meta.find("model." + key);
  if (it == meta.end()) throw nn::CheckpointError("checkpoint lacks model." + key);
  T v{};
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw nn::CheckpointError("bad value for model." + key + ": '" + s + "'");
  }
  return v;
}

}  // namespace

std::map<std::string, std::string> ModelConfig::to_metadata() const {
  return {
      {"model.features", std::to_string(embedder.features)},
      {"model.interactions", std::to_string(embedder.interactions)},
      {"model.filters", std::to_string(embedder.filters)},
      {"model.n_basis", std::to_string(embedder.n_basis)},
      {"model.cutoff", fmt(embedder.cutoff)},
      {"model.hidden", std::to_string(hidden)},
      {"model.hidden_layers", std::to_string(hidden_layers)},
      {"model.multiset_features", std::to_string(multiset_features)},
      {"model.n_fragments", std::to_string(n_fragments)},
      {"model.min_distance", fmt(min_distance)},
      {"model.max_distance", fmt(max_distance)},
      {"model.sigma_distance", fmt(sigma_distance)},
      {"model.sigma_angle", fmt(sigma_angle)},
      {"model.logit_gain", fmt(logit_gain)},
      {"model.seed", std::to_string(seed)},
  };
}

ModelConfig ModelConfig::from_metadata(const std::map<std::string, std::string>& meta) {
  ModelConfig c;
  c.embedder.features = parse_number<int>(meta, "features");
  c.embedder.interactions = parse_number<int>(meta, "interactions");
  c.embedder.filters = parse_number<int>(meta, "filters");
  c.embedder.n_basis = parse_number<int>(meta, "n_basis");
  c.embedder.cutoff = parse_number<double>(meta, "cutoff");
  c.hidden = parse_number<int>(meta, "hidden");
  c.hidden_layers = parse_number<int>(meta, "hidden_layers");
  c.multiset_features = parse_number<int>(meta, "multiset_features");
  c.n_fragments = parse_number<int>(meta, "n_fragments");
  c.min_distance = parse_number<double>(meta, "min_distance");
  c.max_distance = parse_number<double>(meta, "max_distance");
  c.sigma_distance = parse_number<double>(meta, "sigma_distance");
  c.sigma_angle = parse_number<double>(meta, "sigma_angle");
  c.logit_gain = parse_number<double>(meta, "logit_gain");
  c.seed = parse_number<std::uint64_t>(meta, "seed");
  return c;
}

PolicyModel::PolicyModel(const ModelConfig& config) : config_(config) {
  if (config.n_fragments < 1) throw Error("model needs at least one fragment type");
  if (config.hidden < 1 || config.hidden_layers < 0 || config.multiset_features < 1) {
    throw Error("invalid MLP sizes");
  }
  if (!(config.min_distance < config.max_distance) || config.sigma_distance <= 0 || config.sigma_angle <= 0) {
    throw Error("invalid distance range or sigma");
  }
  std::mt19937_64 rng(config.seed);
  const int feat = config.embedder.features;
  const int hf = config.multiset_features;
  const int m = config.n_fragments;
  const int h = config.hidden;
  const int l = config.hidden_layers;
  const double g = config.logit_gain;

  molnet = nn::Embedder(params_, "molnet", config.embedder, rng);
  fragnet = nn::Embedder(params_, "fragnet", config.embedder, rng);
  mlp_multiset = nn::make_mlp(params_, "mlp_F", m, h, l, hf, rng);
  mlp_v = nn::make_mlp(params_, "mlp_v", feat + hf, h, l, 1, rng, g);
  mlp_f = nn::make_mlp(params_, "mlp_f", feat + hf, h, l, m, rng, g);
  mlp_u = nn::make_mlp(params_, "mlp_u", 2 * feat + hf + m, h, l, 1, rng, g);
  mlp_d = nn::make_mlp(params_, "mlp_d", 2 * feat + hf + m, h, l, 1, rng, g);
  mlp_phi = nn::make_mlp(params_, "mlp_phi", 2 * feat + hf + m, h, l, 1, rng, g);
  mlp_sign = nn::make_mlp(params_, "mlp_sign", 2 * feat + hf + m, h, l, 1, rng, g);
  mlp_value = nn::make_mlp(params_, "mlp_value", feat + hf, h, l, 1, rng, 1.0);
}

nn::Checkpoint PolicyModel::to_checkpoint(std::map<std::string, std::string> extra) const {
  nn::Checkpoint c;
  c.metadata = std::move(extra);
  for (auto& [k, v] : config_.to_metadata()) c.metadata[k] = v;
  c.params = params_;
  return c;
}

PolicyModel PolicyModel::from_checkpoint(const nn::Checkpoint& ckpt) {
  PolicyModel model(ModelConfig::from_metadata(ckpt.metadata));
  auto& p = model.params_;
  if (p.size() != ckpt.params.size()) throw nn::CheckpointError("checkpoint parameter count does not match its model config");
  for (nn::ParamId i = 0; i < p.size(); ++i) {
    const auto& src = ckpt.params.value(i);
    if (ckpt.params.name(i) != p.name(i) || src.rows() != p.value(i).rows() || src.cols() != p.value(i).cols()) {
      throw nn::CheckpointError("checkpoint tensor '" + ckpt.params.name(i) + "' does not match the model");
    }
    p.value(i) = src;
  }
  return model;
}

}  // namespace fragforge::policy
