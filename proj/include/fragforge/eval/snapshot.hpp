#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fragforge/env/environment.hpp"
#include "fragforge/eval/validity.hpp"
#include "fragforge/policy/model.hpp"

namespace fragforge::eval {

// Validity of an episode's final structure. Penalized or unfinished episodes
// count as invalid whatever their geometry looks like.
ValidityReport terminal_validity(const env::StepOutcome& last);

struct EpisodeResult {
  chem::AtomCloud structure;
  double episode_return = 0.0;
  double energy = 0.0;  // E(final structure) in kcal/mol; NaN when the episode was penalized
  int length = 0;       // fragments placed, including the first
  env::Termination termination = env::Termination::none;
  ValidityReport validity;
  std::string error;  // set when the environment rejected an action
};

// Plays one episode from env.reset(reset_seed). Sampled unless `greedy`.
EpisodeResult run_episode(const policy::PolicyModel& model, env::Environment& env, std::uint64_t reset_seed,
                          std::mt19937_64& rng, bool greedy = false);

struct EvalSnapshot {
  long step = 0;
  std::vector<EpisodeResult> episodes;
  ValidityRatios cumulative;  // over every structure since the first snapshot
  double mean_return = 0.0;
  double mean_energy = 0.0;  // over unpenalized episodes; NaN if none
};

using EnvFactory = std::function<env::Environment()>;

// Rolls out n_samples episodes with the given policy and folds their validity
// into `cumulative`.
EvalSnapshot evaluation_snapshot(const policy::PolicyModel& model, const EnvFactory& make_env, int n_samples,
                                 long step, std::uint64_t seed, CumulativeValidity& cumulative,
                                 bool greedy = false);

// Writes {step}_{episode}.xyz per structure and {step}_snapshot.json.
void write_snapshot(const EvalSnapshot& snap, const std::filesystem::path& dir);

}  // namespace fragforge::eval
