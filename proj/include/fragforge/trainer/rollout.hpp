#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "fragforge/env/environment.hpp"
#include "fragforge/eval/validity.hpp"
#include "fragforge/policy/model.hpp"
#include "fragforge/trainer/ppo.hpp"

namespace fragforge::trainer {

// A training episode that finished during collection.
struct EpisodeLog {
  long end_step = 0;  // global environment step at which it ended
  int worker = 0;
  double episode_return = 0.0;
  double energy = 0.0;  // NaN when penalized
  int length = 0;
  env::Termination termination = env::Termination::none;
  eval::ValidityReport validity;
};

// One rollout worker: an environment, its RNG stream and the episode in
// progress. Workers persist across collection calls.
class RolloutWorker {
 public:
  RolloutWorker(env::Environment env, int id, std::uint64_t base_seed);

  int id() const { return id_; }
  const env::Environment& environment() const { return env_; }
  const env::EnvState& state() const { return env_.state(); }

  // Takes `n` steps with `model`, resetting after each finished episode.
  // Step k of this call is stamped with global step first_step + k * stride.
  void collect(const policy::PolicyModel& model, int n, long first_step, long stride,
               std::vector<Transition>& out, std::vector<EpisodeLog>& episodes);

 private:
  void start_episode();

  env::Environment env_;
  int id_;
  std::mt19937_64 rng_;
  double return_ = 0.0;
};

// Builds one worker per id with seed base_seed + id.
std::vector<RolloutWorker> make_workers(const env::Environment& prototype, int n_workers, std::uint64_t base_seed);

struct RolloutBatch {
  std::vector<std::vector<Transition>> per_worker;  // contiguous per worker
  std::vector<EpisodeLog> episodes;                 // ordered by end_step
  std::size_t size() const;
};

// Collects n_steps transitions in total, split as evenly as possible (lower
// worker ids take the remainder). Workers run concurrently against a fixed
// parameter snapshot; the result does not depend on scheduling.
void collect_rollouts(const policy::PolicyModel& model, std::vector<RolloutWorker>& workers, long n_steps,
                      long step_offset, RolloutBatch& batch);

// Runs GAE per worker, bootstrapping from V(current state) where a worker's
// segment stops mid-episode, and writes advantages and targets in place.
void compute_advantages(const policy::PolicyModel& model, const std::vector<RolloutWorker>& workers,
                        RolloutBatch& batch, double gamma, double lambda);

}  // namespace fragforge::trainer
