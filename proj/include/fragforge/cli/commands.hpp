#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fragforge/cli/run_config.hpp"
#include "fragforge/energy/backend.hpp"

namespace fragforge::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct TrainOptions {
  std::filesystem::path config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

struct GenerateOptions {
  std::filesystem::path checkpoint;
  int n = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out = "generated";
  bool greedy = false;
};

struct EnergyOptions {
  std::filesystem::path xyz;
  std::optional<std::filesystem::path> config;
  std::vector<std::string> overrides;
};

// Surrogate or external backend per the config, memoized when cache_energies is set.
std::shared_ptr<const energy::EnergyBackend> make_backend(const RunConfig& config);

// Reads FRAGFORGE_WORKERS; returns nullopt when unset, throws ConfigError when malformed.
std::optional<int> workers_from_environment();

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);
int cmd_generate(const GenerateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_validate(const std::filesystem::path& xyz, std::ostream& out, std::ostream& err);
int cmd_energy(const EnergyOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace fragforge::cli
