#include "fragforge/trainer/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fragforge/nn/checkpoint.hpp"

namespace fragforge::trainer {

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

struct Outputs {
  std::filesystem::path dir;
  std::ofstream metrics;
  std::ofstream episodes;

  explicit Outputs(const std::filesystem::path& out) : dir(out) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir / "checkpoints");
    std::filesystem::create_directories(dir / "snapshots");
    metrics.open(dir / "metrics.jsonl", std::ios::trunc);
    episodes.open(dir / "episodes.jsonl", std::ios::trunc);
    if (!metrics || !episodes) throw Error("cannot write into " + dir.string());
  }
  bool enabled() const { return !dir.empty(); }
};

void save(const Outputs& out, const policy::PolicyModel& model, const TrainConfig& cfg, const std::string& name,
          long step) {
  if (!out.enabled()) return;
  auto meta = cfg.checkpoint_metadata;
  meta["step"] = std::to_string(step);
  nn::save_checkpoint(out.dir / "checkpoints" / name, model.to_checkpoint(meta));
}

void normalize(std::vector<Transition*>& all) {
  if (all.size() < 2) return;
  double mean = 0.0;
  for (auto* t : all) mean += t->advantage;
  mean /= static_cast<double>(all.size());
  double var = 0.0;
  for (auto* t : all) var += (t->advantage - mean) * (t->advantage - mean);
  const double sd = std::sqrt(var / static_cast<double>(all.size()));
  for (auto* t : all) t->advantage = (t->advantage - mean) / (sd + 1e-8);
}

}  // namespace

std::vector<long> evaluation_points(const PPOConfig& cfg) {
  std::vector<long> pts;
  for (long s = cfg.eval_start; s <= cfg.total_steps; s += cfg.eval_interval) {
    if (s > 0) pts.push_back(s);
  }
  return pts;
}

TrainResult train(const TrainConfig& config, const chem::FragmentMultiset& library,
                  std::shared_ptr<const energy::EnergyBackend> backend) {
  const PPOConfig& ppo = config.ppo;
  ppo.validate();
  if (library.size() == 0) throw Error("empty fragment library");

  policy::ModelConfig mcfg = config.model;
  mcfg.n_fragments = static_cast<int>(library.size());
  mcfg.min_distance = config.env.min_distance;
  mcfg.max_distance = config.env.max_distance;
  TrainResult result;
  result.model = std::make_unique<policy::PolicyModel>(mcfg);
  policy::PolicyModel& model = *result.model;

  Outputs out(config.out_dir);
  save(out, model, config, "initial.ckpt", 0);
  if (ppo.total_steps == 0) return result;

  const auto t0 = std::chrono::steady_clock::now();
  env::Environment prototype(library, backend, config.env, config.start);
  auto workers = make_workers(prototype, ppo.workers, config.seed);
  auto make_env = [&] { return env::Environment(library, backend, config.env, config.start); };
  Adam adam(model.params(), ppo.learning_rate, ppo.adam_beta1, ppo.adam_beta2, ppo.adam_epsilon);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5f3759dfull);
  eval::CumulativeValidity cumulative;

  const auto points = evaluation_points(ppo);
  std::size_t next_point = 0;
  std::optional<LossParts> last_loss;
  double last_grad_norm = 0.0;
  long step = 0;
  std::size_t episodes_written = 0;

  auto flush_episodes = [&] {
    if (!out.enabled()) return;
    for (; episodes_written < result.episodes.size(); ++episodes_written) {
      const auto& e = result.episodes[episodes_written];
      out.episodes << nlohmann::json{{"end_step", e.end_step},
                                     {"worker", e.worker},
                                     {"return", e.episode_return},
                                     {"energy_kcal_mol", finite_or_null(e.energy)},
                                     {"length", e.length},
                                     {"termination", env::to_string(e.termination)},
                                     {"rotation_valid", e.validity.rotation_valid},
                                     {"bond_valid", e.validity.bond_valid}}
                          .dump()
                   << "\n";
    }
    out.episodes.flush();
  };

  auto evaluate = [&](long at) {
    auto snap = eval::evaluation_snapshot(model, make_env, config.eval_samples, at,
                                          config.seed + 1000003ull * static_cast<std::uint64_t>(at), cumulative,
                                          config.eval_greedy);
    nlohmann::json rec;
    rec["step"] = at;
    rec["mean_episode_reward"] = snap.mean_return;
    rec["mean_episode_energy_kcal_mol"] = finite_or_null(snap.mean_energy);
    rec["cumulative_rotation_validity"] = snap.cumulative.rotation;
    rec["cumulative_bond_validity"] = snap.cumulative.bond;
    rec["evaluated_structures"] = snap.cumulative.count;
    if (last_loss) {
      rec["loss"] = {{"total", last_loss->total},
                     {"policy", last_loss->policy},
                     {"value", last_loss->value},
                     {"entropy", last_loss->entropy},
                     {"clip_fraction", last_loss->clip_fraction},
                     {"approx_kl", last_loss->approx_kl},
                     {"grad_norm", last_grad_norm}};
    } else {
      rec["loss"] = nullptr;
    }
    rec["updates"] = result.updates;
    rec["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.metrics.push_back(rec);
    if (out.enabled()) {
      eval::write_snapshot(snap, out.dir / "snapshots");
      save(out, model, config, "step_" + std::to_string(at) + ".ckpt", at);
      out.metrics << rec.dump() << "\n";
      out.metrics.flush();
    }
  };

  while (step < ppo.total_steps) {
    const long segment = std::min(ppo.segment_steps, ppo.total_steps - step);
    RolloutBatch batch;
    long collected = 0;
    while (collected < segment) {
      long chunk = segment - collected;
      if (next_point < points.size()) chunk = std::min(chunk, points[next_point] - (step + collected));
      collect_rollouts(model, workers, chunk, step + collected, batch);
      collected += chunk;
      if (next_point < points.size() && step + collected == points[next_point]) {
        evaluate(points[next_point]);
        ++next_point;
      }
    }
    result.episodes.insert(result.episodes.end(), batch.episodes.begin(), batch.episodes.end());
    flush_episodes();

    compute_advantages(model, workers, batch, ppo.gamma, ppo.gae_lambda);
    std::vector<Transition*> all;
    for (auto& seq : batch.per_worker) {
      for (auto& t : seq) all.push_back(&t);
    }
    if (ppo.normalize_advantages) normalize(all);

    for (int epoch = 0; epoch < ppo.epochs && !all.empty(); ++epoch) {
      std::shuffle(all.begin(), all.end(), shuffle_rng);
      for (std::size_t lo = 0; lo < all.size(); lo += static_cast<std::size_t>(ppo.minibatch_size)) {
        const std::size_t hi = std::min(all.size(), lo + static_cast<std::size_t>(ppo.minibatch_size));
        std::vector<const Transition*> mb(all.begin() + static_cast<long>(lo), all.begin() + static_cast<long>(hi));
        auto grads = model.params().zeros_like();
        LossParts parts;
        try {
          parts = ppo_objective(model, mb, ppo, &grads, config.env.bond_factor);
        } catch (const Error& e) {
          save(out, model, config, "last_good.ckpt", step + collected);
          throw TrainingAborted(std::string("training aborted: ") + e.what());
        }
        last_grad_norm = nn::clip_global_norm(grads, ppo.max_grad_norm);
        if (!std::isfinite(last_grad_norm)) {
          save(out, model, config, "last_good.ckpt", step + collected);
          throw TrainingAborted("training aborted: non-finite gradient");
        }
        adam.step(model.params(), grads);
        last_loss = parts;
        ++result.updates;
      }
    }
    step += segment;
  }
  result.steps = step;
  save(out, model, config, "final.ckpt", step);
  return result;
}

}  // namespace fragforge::trainer
