#include "fragforge/cli/run_config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace fragforge::cli {

namespace {

struct Field {
  std::string key;
  std::function<void(RunConfig&, const YAML::Node&)> set;
  std::function<void(const RunConfig&, YAML::Emitter&)> emit;
};

template <typename T>
T as(const YAML::Node& n, const std::string& key, const char* type_name) {
  if (!n.IsScalar()) throw ConfigError("'" + key + "' must be a " + type_name);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("'" + key + "' must be a " + type_name + ", got '" + n.Scalar() + "'");
  }
}

template <typename T>
const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "boolean";
  else if constexpr (std::is_integral_v<T>) return "integer";
  else if constexpr (std::is_floating_point_v<T>) return "number";
  else return "string";
}

// Binds a key to a member reached through `ref`.
template <typename T, typename Ref>
Field field(std::string key, Ref ref) {
  Field f;
  f.key = key;
  f.set = [key, ref](RunConfig& c, const YAML::Node& n) { ref(c) = as<T>(n, key, type_name<T>()); };
  f.emit = [ref](const RunConfig& c, YAML::Emitter& e) { e << ref(const_cast<RunConfig&>(c)); };
  return f;
}

Field path_field(std::string key, std::filesystem::path RunConfig::*member) {
  Field f;
  f.key = key;
  f.set = [key, member](RunConfig& c, const YAML::Node& n) { c.*member = as<std::string>(n, key, "string"); };
  f.emit = [member](const RunConfig& c, YAML::Emitter& e) { e << (c.*member).string(); };
  return f;
}

#define FF_FIELD(T, key, expr) field<T>(key, [](RunConfig& c) -> T& { return expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      path_field("manifest", &RunConfig::manifest),
      FF_FIELD(std::string, "backend", c.backend),
      FF_FIELD(bool, "cache_energies", c.cache_energies),
      FF_FIELD(std::string, "start", c.start),
      FF_FIELD(std::uint64_t, "seed", c.seed),
      path_field("out_dir", &RunConfig::out_dir),
      FF_FIELD(int, "eval_samples", c.eval_samples),
      FF_FIELD(bool, "eval_greedy", c.eval_greedy),
      FF_FIELD(double, "clip_epsilon", c.ppo.clip_epsilon),
      FF_FIELD(double, "max_grad_norm", c.ppo.max_grad_norm),
      FF_FIELD(double, "gae_lambda", c.ppo.gae_lambda),
      FF_FIELD(double, "value_coef", c.ppo.value_coef),
      FF_FIELD(double, "entropy_coef", c.ppo.entropy_coef),
      FF_FIELD(int, "epochs", c.ppo.epochs),
      FF_FIELD(double, "learning_rate", c.ppo.learning_rate),
      FF_FIELD(double, "gamma", c.ppo.gamma),
      FF_FIELD(int, "minibatch_size", c.ppo.minibatch_size),
      FF_FIELD(int, "workers", c.ppo.workers),
      FF_FIELD(long, "total_steps", c.ppo.total_steps),
      FF_FIELD(long, "eval_interval", c.ppo.eval_interval),
      FF_FIELD(long, "eval_start", c.ppo.eval_start),
      FF_FIELD(long, "segment_steps", c.ppo.segment_steps),
      FF_FIELD(bool, "normalize_advantages", c.ppo.normalize_advantages),
      FF_FIELD(double, "adam_beta1", c.ppo.adam_beta1),
      FF_FIELD(double, "adam_beta2", c.ppo.adam_beta2),
      FF_FIELD(double, "adam_epsilon", c.ppo.adam_epsilon),
      FF_FIELD(int, "grad_chunks", c.ppo.grad_chunks),
      FF_FIELD(int, "features", c.model.embedder.features),
      FF_FIELD(int, "interactions", c.model.embedder.interactions),
      FF_FIELD(int, "filters", c.model.embedder.filters),
      FF_FIELD(int, "n_basis", c.model.embedder.n_basis),
      FF_FIELD(double, "cutoff", c.model.embedder.cutoff),
      FF_FIELD(int, "hidden", c.model.hidden),
      FF_FIELD(int, "hidden_layers", c.model.hidden_layers),
      FF_FIELD(int, "multiset_features", c.model.multiset_features),
      FF_FIELD(double, "sigma_distance", c.model.sigma_distance),
      FF_FIELD(double, "sigma_angle", c.model.sigma_angle),
      FF_FIELD(double, "logit_gain", c.model.logit_gain),
      FF_FIELD(double, "min_distance", c.env.min_distance),
      FF_FIELD(double, "max_distance", c.env.max_distance),
      FF_FIELD(double, "clash_distance", c.env.clash_distance),
      FF_FIELD(double, "max_contact", c.env.max_contact),
      FF_FIELD(double, "penalty", c.env.penalty),
      FF_FIELD(double, "bond_factor", c.env.bond_factor),
      FF_FIELD(double, "surrogate.k_bond", c.surrogate.k_bond),
      FF_FIELD(double, "surrogate.lj_epsilon", c.surrogate.lj_epsilon),
      FF_FIELD(double, "surrogate.lj_sigma_scale", c.surrogate.lj_sigma_scale),
      FF_FIELD(double, "surrogate.lj_sigma_offset", c.surrogate.lj_sigma_offset),
      FF_FIELD(std::string, "external.command", c.external.command),
      FF_FIELD(double, "external.unit_factor", c.external.unit_factor),
      FF_FIELD(double, "external.timeout_seconds", c.external.timeout_seconds),
  };
  return table;
}

#undef FF_FIELD

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void check(const RunConfig& c) {
  if (c.backend != "surrogate" && c.backend != "external") {
    throw ConfigError("backend must be 'surrogate' or 'external', got '" + c.backend + "'");
  }
  if (c.backend == "external" && c.external.command.empty()) throw ConfigError("external.command is required");
  if (c.eval_samples < 0) throw ConfigError("eval_samples must be non-negative");
  try {
    c.ppo.validate();
    c.surrogate.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void apply_node(RunConfig& c, const YAML::Node& node, const std::string& prefix) {
  if (!node.IsMap()) throw ConfigError(prefix.empty() ? "config must be a mapping" : "'" + prefix + "' must be a mapping");
  for (const auto& kv : node) {
    const std::string key = prefix + kv.first.as<std::string>();
    if (kv.second.IsMap()) {
      if (key != "surrogate" && key != "external") throw ConfigError("unknown config section '" + key + "'");
      apply_node(c, kv.second, key + ".");
    } else {
      find_field(key).set(c, kv.second);
    }
  }
}

}  // namespace

bool RunConfig::operator==(const RunConfig& o) const { return serialize_config(*this) == serialize_config(o); }

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (root.IsDefined() && !root.IsNull()) apply_node(c, root, "");
  check(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse_config(ss.str());
  if (!c.manifest.empty() && c.manifest.is_relative()) c.manifest = path.parent_path() / c.manifest;
  return c;
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("bad override value for '" + key + "'");
  }
  if (value.IsNull()) value = YAML::Node(std::string());
  find_field(key).set(config, value);
  check(config);
}

std::string serialize_config(const RunConfig& config) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string sec = dot == std::string::npos ? "" : f.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) e << YAML::EndMap;
      if (!sec.empty()) e << YAML::Key << sec << YAML::Value << YAML::BeginMap;
      section = sec;
    }
    e << YAML::Key << (dot == std::string::npos ? f.key : f.key.substr(dot + 1)) << YAML::Value;
    f.emit(config, e);
  }
  if (!section.empty()) e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace fragforge::cli
