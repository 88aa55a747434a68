#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "fragforge/chem/fragment_library.hpp"
#include "fragforge/energy/backend.hpp"
#include "fragforge/env/environment.hpp"
#include "fragforge/eval/snapshot.hpp"
#include "fragforge/policy/model.hpp"
#include "fragforge/trainer/ppo.hpp"
#include "fragforge/trainer/rollout.hpp"

namespace fragforge::trainer {

struct TrainConfig {
  PPOConfig ppo;
  policy::ModelConfig model;  // n_fragments is taken from the library
  env::EnvConfig env;
  env::StartSpec start;
  std::uint64_t seed = 0;
  int eval_samples = 10;
  bool eval_greedy = false;
  std::filesystem::path out_dir;  // empty: keep everything in memory
  std::map<std::string, std::string> checkpoint_metadata;  // copied into every checkpoint
};

class TrainingAborted : public Error {
 public:
  using Error::Error;
};

struct TrainResult {
  std::unique_ptr<policy::PolicyModel> model;
  std::vector<nlohmann::json> metrics;  // one record per evaluation point
  std::vector<EpisodeLog> episodes;     // every finished training episode
  long steps = 0;
  long updates = 0;
};

// Steps at which evaluation happens: eval_start, eval_start + interval, ...
// up to total_steps.
std::vector<long> evaluation_points(const PPOConfig& cfg);

// Alternates rollout collection and PPO updates. At each evaluation point
// writes a snapshot, a checkpoint and a metrics record (metrics.jsonl) when
// out_dir is set. A non-finite loss saves last_good.ckpt and throws
// TrainingAborted.
TrainResult train(const TrainConfig& config, const chem::FragmentMultiset& library,
                  std::shared_ptr<const energy::EnergyBackend> backend);

}  // namespace fragforge::trainer
