#include "fragforge/env/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fragforge/chem/bonds.hpp"
#include "fragforge/geometry/attach.hpp"
#include "fragforge/geometry/transform.hpp"

namespace fragforge::env {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::none: return "none";
    case Termination::exhausted: return "exhausted";
    case Termination::too_close: return "too-close";
    case Termination::too_far: return "too-far";
    case Termination::backend_failure: return "backend-failure";
    case Termination::no_anchor: return "no-anchor";
  }
  return "unknown";
}

EnvState reset(const chem::FragmentMultiset& library, const StartSpec& start, std::uint64_t seed) {
  EnvState s;
  s.multiset = library;
  s.multiset.reset();
  if (start.kind == StartSpec::Kind::given) {
    if (start.molecule.empty()) throw Error("reset: given molecule is empty");
    if (s.multiset.exhausted()) throw Error("reset: fragment multiset is empty");
    s.molecule = start.molecule;
    s.horizon = s.multiset.total_remaining();
    return s;
  }
  if (library.size() == 0 || s.multiset.exhausted()) throw Error("reset: fragment multiset is empty");

  std::size_t first = start.fragment;
  if (start.kind == StartSpec::Kind::random) {
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(s.multiset.remaining().begin(),
                                                 s.multiset.remaining().end());
    first = pick(rng);
  } else if (first >= library.size()) {
    throw Error("reset: start fragment index out of range");
  }
  s.horizon = s.multiset.total_remaining();
  s.multiset.take(first);
  const auto& frag = library.fragment(first).cloud;
  s.molecule = geometry::rigid_transform_apply(
      geometry::RigidTransform::translation_by(-frag.heavy_centroid()), frag);
  s.placements = 1;
  s.terminal = s.multiset.exhausted();
  return s;
}

std::vector<bool> anchor_hydrogen_mask(const chem::AtomCloud& cloud, double bond_factor) {
  std::vector<bool> mask(cloud.size(), false);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    mask[i] = cloud.is_hydrogen(i) && chem::find_heavy_anchor(cloud, i, bond_factor).has_value();
  }
  return mask;
}

ActionMasks action_masks(const EnvState& state, double bond_factor) {
  if (state.terminal) throw Error("action_masks: state is terminal");
  ActionMasks m;
  m.molecule_hydrogens = anchor_hydrogen_mask(state.molecule, bond_factor);
  const auto& ms = state.multiset;
  m.fragments.resize(ms.size());
  m.fragment_hydrogens.resize(ms.size());
  for (std::size_t f = 0; f < ms.size(); ++f) {
    m.fragments[f] = ms.remaining(f) > 0;
    const auto& frag = ms.fragment(f);
    m.fragment_hydrogens[f].assign(frag.cloud.size(), false);
    for (std::size_t h : frag.anchor_hydrogens) m.fragment_hydrogens[f][h] = true;
  }
  return m;
}

namespace {

void check_action(const EnvState& state, const Action& a, const EnvConfig& cfg) {
  const auto& mol = state.molecule;
  if (a.molecule_hydrogen >= mol.size() || !mol.is_hydrogen(a.molecule_hydrogen) ||
      !chem::find_heavy_anchor(mol, a.molecule_hydrogen, cfg.bond_factor)) {
    throw IllegalAction("molecule atom " + std::to_string(a.molecule_hydrogen) +
                        " is not an anchorable hydrogen");
  }
  if (a.fragment >= state.multiset.size() || state.multiset.remaining(a.fragment) <= 0) {
    throw IllegalAction("fragment " + std::to_string(a.fragment) + " is not available");
  }
  const auto& anchors = state.multiset.fragment(a.fragment).anchor_hydrogens;
  if (std::find(anchors.begin(), anchors.end(), a.fragment_hydrogen) == anchors.end()) {
    throw IllegalAction("fragment atom " + std::to_string(a.fragment_hydrogen) +
                        " is not an anchorable hydrogen");
  }
  if (!(a.distance >= cfg.min_distance && a.distance <= cfg.max_distance)) {
    throw IllegalAction("distance " + std::to_string(a.distance) + " outside the allowed range");
  }
  if (!(a.abs_angle >= 0.0 && a.abs_angle <= std::numbers::pi)) {
    throw IllegalAction("|phi| outside [0, pi]");
  }
  if (a.sign != 1 && a.sign != -1) throw IllegalAction("sign must be +1 or -1");
}

}  // namespace

StepOutcome step(const EnvState& state, const Action& action, const energy::EnergyBackend& backend,
                 const EnvConfig& cfg) {
  if (state.terminal) throw Error("step: episode already finished");
  check_action(state, action, cfg);

  const auto& frag = state.multiset.fragment(action.fragment);
  const auto anchors = geometry::make_anchor_pair(state.molecule, action.molecule_hydrogen,
                                                  frag.cloud, action.fragment_hydrogen,
                                                  cfg.bond_factor);
  auto placed = geometry::attach_fragment(state.molecule, frag.cloud, anchors, action.distance,
                                          action.abs_angle, action.sign, cfg.bond_factor);

  StepOutcome out;
  out.next = state;
  out.next.molecule = std::move(placed.molecule);
  out.next.multiset.take(action.fragment);
  out.next.step = state.step + 1;
  out.next.placements = state.placements + 1;
  out.info.torsion_applied = placed.torsion_applied;

  const chem::AtomCloud molecule_without_h = state.molecule.without(action.molecule_hydrogen);
  chem::AtomCloud new_atoms;
  for (std::size_t i = placed.fragment_offset; i < out.next.molecule.size(); ++i) {
    new_atoms.add(out.next.molecule.element(i), out.next.molecule.position(i));
  }
  out.info.min_contact = geometry::min_cross_distance(molecule_without_h, new_atoms);

  auto penalize = [&](Termination why, std::string message) {
    out.reward = cfg.penalty;
    out.done = true;
    out.info.penalized = true;
    out.info.termination = why;
    out.info.message = std::move(message);
  };

  if (out.info.min_contact < cfg.clash_distance) {
    penalize(Termination::too_close, "fragment placed too close");
  } else if (out.info.min_contact > cfg.max_contact) {
    penalize(Termination::too_far, "fragment placed too far");
  } else {
    try {
      out.info.energies = energy::step_reward(molecule_without_h, frag.cloud.without(action.fragment_hydrogen),
                                              out.next.molecule, backend);
      out.reward = out.info.energies.reward;
      if (!std::isfinite(out.reward)) throw energy::EnergyError(energy::EnergyError::Kind::other, "non-finite energy");
    } catch (const energy::EnergyError& e) {
      penalize(Termination::backend_failure, e.what());
    }
  }

  if (!out.done) {
    if (out.next.multiset.exhausted()) {
      out.done = true;
      out.info.termination = Termination::exhausted;
    } else {
      auto mask = anchor_hydrogen_mask(out.next.molecule, cfg.bond_factor);
      if (std::find(mask.begin(), mask.end(), true) == mask.end()) {
        out.done = true;
        out.info.termination = Termination::no_anchor;
      }
    }
  }
  out.next.terminal = out.done;
  out.info.validity = eval::classify_validity(out.next.molecule, cfg.bond_factor, cfg.clash_distance);
  return out;
}

Environment::Environment(chem::FragmentMultiset library,
                         std::shared_ptr<const energy::EnergyBackend> backend, EnvConfig config,
                         StartSpec start)
    : library_(std::move(library)),
      backend_(std::move(backend)),
      config_(config),
      start_(std::move(start)) {}

const EnvState& Environment::reset(std::uint64_t seed) {
  state_ = env::reset(library_, start_, seed);
  return state_;
}

StepOutcome Environment::step(const Action& action) {
  auto out = env::step(state_, action, *backend_, config_);
  state_ = out.next;
  return out;
}

}  // namespace fragforge::env
