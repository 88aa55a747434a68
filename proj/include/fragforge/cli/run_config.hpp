#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fragforge/energy/external.hpp"
#include "fragforge/energy/surrogate.hpp"
#include "fragforge/env/environment.hpp"
#include "fragforge/error.hpp"
#include "fragforge/policy/model.hpp"
#include "fragforge/trainer/ppo.hpp"

namespace fragforge::cli {

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Everything a training run needs. Fields left out of the YAML keep these
// defaults.
struct RunConfig {
  std::filesystem::path manifest;
  std::string backend = "surrogate";  // surrogate | external
  energy::SurrogateParams surrogate;
  energy::ExternalAdapterConfig external;
  bool cache_energies = true;
  trainer::PPOConfig ppo;
  policy::ModelConfig model;
  env::EnvConfig env;
  std::string start = "random";  // "random" or a fragment id from the manifest
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "run";
  int eval_samples = 10;
  bool eval_greedy = false;

  bool operator==(const RunConfig& other) const;
};

// Parses YAML text. Unknown keys and values of the wrong type are errors.
RunConfig parse_config(const std::string& text);
// Reads a file; a relative manifest path is resolved against the file's directory.
RunConfig load_config(const std::filesystem::path& path);

// Applies "key=value" (dotted keys for nested sections, e.g. surrogate.k_bond=50).
void apply_override(RunConfig& config, const std::string& assignment);

// Full YAML listing of every key, parseable by parse_config.
std::string serialize_config(const RunConfig& config);

// Every accepted key, dotted for nested sections.
std::vector<std::string> config_keys();

}  // namespace fragforge::cli
