#include "fragforge/eval/snapshot.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "fragforge/chem/xyz.hpp"
#include "fragforge/policy/policy.hpp"

namespace fragforge::eval {

ValidityReport terminal_validity(const env::StepOutcome& last) {
  ValidityReport r = last.info.validity;
  switch (last.info.termination) {
    case env::Termination::exhausted:
      return r;
    case env::Termination::too_close:
      r.reason = ValidityReason::clash;
      break;
    case env::Termination::too_far:
      r.reason = ValidityReason::disconnected;
      break;
    default:
      r.reason = ValidityReason::incomplete;
      break;
  }
  r.rotation_valid = false;
  r.bond_valid = false;
  return r;
}

EpisodeResult run_episode(const policy::PolicyModel& model, env::Environment& env, std::uint64_t reset_seed,
                          std::mt19937_64& rng, bool greedy) {
  EpisodeResult res;
  env.reset(reset_seed);
  res.length = env.state().placements;
  if (env.state().multiset.exhausted()) {
    res.structure = env.state().molecule;
    res.energy = env.backend().evaluate(res.structure);
    res.termination = env::Termination::exhausted;
    res.validity = classify_validity(res.structure, env.config().bond_factor, env.config().clash_distance);
    return res;
  }
  const double bond_factor = env.config().bond_factor;
  while (true) {
    env::StepOutcome out;
    try {
      auto a = greedy ? policy::greedy_action(model, env.state(), bond_factor)
                      : policy::sample_action(model, env.state(), rng, bond_factor);
      out = env.step(a.action);
    } catch (const Error& e) {
      res.error = e.what();
      res.structure = env.state().molecule;
      res.energy = std::numeric_limits<double>::quiet_NaN();
      res.termination = env::Termination::backend_failure;
      res.validity = ValidityReport{false, false, ValidityReason::incomplete, {}};
      return res;
    }
    res.episode_return += out.reward;
    res.length = out.next.placements;
    if (out.done) {
      res.structure = out.next.molecule;
      res.termination = out.info.termination;
      res.energy = out.info.penalized ? std::numeric_limits<double>::quiet_NaN() : out.info.energies.next_energy;
      res.validity = terminal_validity(out);
      return res;
    }
  }
}

EvalSnapshot evaluation_snapshot(const policy::PolicyModel& model, const EnvFactory& make_env, int n_samples,
                                 long step, std::uint64_t seed, CumulativeValidity& cumulative, bool greedy) {
  EvalSnapshot snap;
  snap.step = step;
  std::mt19937_64 rng(seed);
  double energy_sum = 0.0;
  int energy_n = 0;
  if (n_samples > 0) {
    env::Environment env = make_env();
    for (int i = 0; i < n_samples; ++i) {
      const std::uint64_t reset_seed = rng();
      snap.episodes.push_back(run_episode(model, env, reset_seed, rng, greedy));
      const auto& ep = snap.episodes.back();
      cumulative.add(ep.validity);
      snap.mean_return += ep.episode_return;
      if (std::isfinite(ep.energy)) {
        energy_sum += ep.energy;
        ++energy_n;
      }
    }
    snap.mean_return /= n_samples;
  }
  snap.mean_energy = energy_n > 0 ? energy_sum / energy_n : std::numeric_limits<double>::quiet_NaN();
  snap.cumulative = {cumulative.rotation_ratio(), cumulative.bond_ratio(), cumulative.total()};
  return snap;
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void write_snapshot(const EvalSnapshot& snap, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["step"] = snap.step;
  meta["mean_return"] = snap.mean_return;
  meta["mean_energy_kcal_mol"] = number_or_null(snap.mean_energy);
  meta["cumulative_rotation_validity"] = snap.cumulative.rotation;
  meta["cumulative_bond_validity"] = snap.cumulative.bond;
  meta["cumulative_count"] = snap.cumulative.count;
  meta["structures"] = nlohmann::json::array();
  for (std::size_t i = 0; i < snap.episodes.size(); ++i) {
    const auto& ep = snap.episodes[i];
    const std::string file = std::to_string(snap.step) + "_" + std::to_string(i) + ".xyz";
    if (!ep.structure.empty()) {
      chem::write_xyz_file(dir / file, ep.structure,
                           "step=" + std::to_string(snap.step) + " episode=" + std::to_string(i) +
                               " formula=" + ep.structure.formula().to_string());
    }
    meta["structures"].push_back({{"file", ep.structure.empty() ? nlohmann::json(nullptr) : nlohmann::json(file)},
                                  {"return", ep.episode_return},
                                  {"energy_kcal_mol", number_or_null(ep.energy)},
                                  {"length", ep.length},
                                  {"termination", env::to_string(ep.termination)},
                                  {"rotation_valid", ep.validity.rotation_valid},
                                  {"bond_valid", ep.validity.bond_valid},
                                  {"reason", to_string(ep.validity.reason)},
                                  {"components", ep.validity.component_formulas}});
  }
  std::ofstream out(dir / (std::to_string(snap.step) + "_snapshot.json"));
  out << meta.dump(2) << "\n";
}

}  // namespace fragforge::eval
