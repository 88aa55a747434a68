#include "fragforge/trainer/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "fragforge/error.hpp"
#include "fragforge/eval/snapshot.hpp"
#include "fragforge/policy/policy.hpp"
#include "fragforge/trainer/gae.hpp"

namespace fragforge::trainer {

RolloutWorker::RolloutWorker(env::Environment env, int id, std::uint64_t base_seed)
    : env_(std::move(env)), id_(id), rng_(base_seed + static_cast<std::uint64_t>(id)) {
  start_episode();
}

void RolloutWorker::start_episode() {
  env_.reset(rng_());
  return_ = 0.0;
}

void RolloutWorker::collect(const policy::PolicyModel& model, int n, long first_step, long stride,
                            std::vector<Transition>& out, std::vector<EpisodeLog>& episodes) {
  const double bond_factor = env_.config().bond_factor;
  for (int k = 0; k < n; ++k) {
    const long global = first_step + k * stride;
    Transition t;
    t.worker = id_;
    t.state = env_.state();
    env::StepOutcome step;
    bool failed = false;
    std::string error;
    try {
      auto sampled = policy::sample_action(model, t.state, rng_, bond_factor);
      t.action = sampled.action;
      t.log_prob = sampled.log_prob;
      t.value = policy::state_value(model, t.state);
      step = env_.step(t.action);
    } catch (const Error& e) {
      failed = true;
      error = e.what();
    }
    if (failed) {
      // The transition cannot be replayed by the learner, so it is dropped,
      // the episode is cut at the previous step and counted as invalid.
      if (!out.empty() && !out.back().done) out.back().done = true;
      EpisodeLog log;
      log.end_step = global;
      log.worker = id_;
      log.episode_return = return_;
      log.energy = std::numeric_limits<double>::quiet_NaN();
      log.length = t.state.placements;
      log.termination = env::Termination::backend_failure;
      log.validity = {false, false, eval::ValidityReason::incomplete, {}};
      episodes.push_back(std::move(log));
      start_episode();
      continue;
    }
    t.reward = step.reward;
    t.done = step.done;
    return_ += step.reward;
    out.push_back(std::move(t));
    if (step.done) {
      EpisodeLog log;
      log.end_step = global;
      log.worker = id_;
      log.episode_return = return_;
      log.energy = step.info.penalized ? std::numeric_limits<double>::quiet_NaN() : step.info.energies.next_energy;
      log.length = step.next.placements;
      log.termination = step.info.termination;
      log.validity = eval::terminal_validity(step);
      episodes.push_back(std::move(log));
      start_episode();
    }
  }
}

std::vector<RolloutWorker> make_workers(const env::Environment& prototype, int n_workers, std::uint64_t base_seed) {
  if (n_workers < 1) throw Error("need at least one rollout worker");
  std::vector<RolloutWorker> workers;
  workers.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) workers.emplace_back(prototype, w, base_seed);
  return workers;
}

std::size_t RolloutBatch::size() const {
  std::size_t n = 0;
  for (const auto& w : per_worker) n += w.size();
  return n;
}

void collect_rollouts(const policy::PolicyModel& model, std::vector<RolloutWorker>& workers, long n_steps,
                      long step_offset, RolloutBatch& batch) {
  const auto n_workers = static_cast<long>(workers.size());
  if (n_workers == 0) throw Error("no rollout workers");
  if (batch.per_worker.size() != workers.size()) batch.per_worker.resize(workers.size());
  if (n_steps <= 0) return;

  std::vector<std::vector<EpisodeLog>> logs(workers.size());
  std::vector<std::exception_ptr> errors(workers.size());
  auto run = [&](std::size_t w) {
    const long share = n_steps / n_workers + (static_cast<long>(w) < n_steps % n_workers ? 1 : 0);
    try {
      workers[w].collect(model, static_cast<int>(share), step_offset + static_cast<long>(w), n_workers,
                         batch.per_worker[w], logs[w]);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers.size() == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers.size(); ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<EpisodeLog> merged;
  for (auto& l : logs) merged.insert(merged.end(), l.begin(), l.end());
  std::stable_sort(merged.begin(), merged.end(),
                   [](const EpisodeLog& a, const EpisodeLog& b) { return a.end_step < b.end_step; });
  batch.episodes.insert(batch.episodes.end(), merged.begin(), merged.end());
}

void compute_advantages(const policy::PolicyModel& model, const std::vector<RolloutWorker>& workers,
                        RolloutBatch& batch, double gamma, double lambda) {
  for (std::size_t w = 0; w < batch.per_worker.size(); ++w) {
    auto& seq = batch.per_worker[w];
    if (seq.empty()) continue;
    std::vector<double> rewards, values;
    std::vector<bool> dones;
    for (const auto& t : seq) {
      rewards.push_back(t.reward);
      values.push_back(t.value);
      dones.push_back(t.done);
    }
    double bootstrap = 0.0;
    if (!seq.back().done) bootstrap = policy::state_value(model, workers[w].state());
    auto gae = gae_advantages(rewards, values, dones, gamma, lambda, bootstrap);
    for (std::size_t k = 0; k < seq.size(); ++k) {
      seq[k].advantage = gae.advantages[k];
      seq[k].target = gae.targets[k];
    }
  }
}

}  // namespace fragforge::trainer
