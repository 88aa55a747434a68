#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fragforge/chem/atom_cloud.hpp"
#include "fragforge/chem/fragment_library.hpp"
#include "fragforge/energy/backend.hpp"
#include "fragforge/energy/reward.hpp"
#include "fragforge/eval/validity.hpp"
#include "fragforge/error.hpp"

namespace fragforge::env {

// A masked or malformed action: a programming error, not an episode outcome.
class IllegalAction : public Error {
 public:
  using Error::Error;
};

struct EnvConfig {
  double min_distance = 1.10;   // placement distance range, Angstrom
  double max_distance = 2.10;
  double clash_distance = 0.6;  // closest new-fragment contact below this ends the episode
  double max_contact = 2.0;     // closest contact above this ends the episode
  double penalty = -10.0;
  double bond_factor = chem::kDefaultBondFactor;
};

struct Action {
  std::size_t molecule_hydrogen = 0;  // v_M
  std::size_t fragment = 0;           // f
  std::size_t fragment_hydrogen = 0;  // u_f
  double distance = 0.0;              // d, Angstrom
  double abs_angle = 0.0;             // |phi|, radians in [0, pi]
  int sign = 1;                       // sign of phi

  bool operator==(const Action&) const = default;
};

struct EnvState {
  chem::AtomCloud molecule;  // provenance holds the fragment index of each atom
  chem::FragmentMultiset multiset;
  int step = 0;        // step() calls since reset
  int placements = 0;  // fragments placed, including the initial one
  int horizon = 0;     // fragments still to place at reset
  bool terminal = false;
};

enum class Termination { none, exhausted, too_close, too_far, backend_failure, no_anchor };

std::string to_string(Termination t);

struct StepInfo {
  Termination termination = Termination::none;
  bool penalized = false;
  double min_contact = 0.0;
  bool torsion_applied = false;
  energy::RewardTerms energies;
  eval::ValidityReport validity;
  std::string message;
};

struct StepOutcome {
  EnvState next;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct ActionMasks {
  std::vector<bool> molecule_hydrogens;               // M_v
  std::vector<bool> fragments;                        // M_f
  std::vector<std::vector<bool>> fragment_hydrogens;  // M_u per fragment
};

struct StartSpec {
  enum class Kind { random, fixed, given };
  Kind kind = Kind::random;
  std::size_t fragment = 0;     // for fixed
  chem::AtomCloud molecule;     // for given

  static StartSpec random() { return {}; }
  static StartSpec fixed(std::size_t f) { return {Kind::fixed, f, {}}; }
  static StartSpec given(chem::AtomCloud m) { return {Kind::given, 0, std::move(m)}; }
};

// Places the start fragment with its heavy-atom centroid at the origin (or
// adopts the given molecule) and returns the t = 0 state.
EnvState reset(const chem::FragmentMultiset& library, const StartSpec& start, std::uint64_t seed);

// Throws Error on a terminal state.
ActionMasks action_masks(const EnvState& state, double bond_factor = chem::kDefaultBondFactor);

// Molecule hydrogens that can anchor a new fragment.
std::vector<bool> anchor_hydrogen_mask(const chem::AtomCloud& cloud,
                                       double bond_factor = chem::kDefaultBondFactor);

StepOutcome step(const EnvState& state, const Action& action, const energy::EnergyBackend& backend,
                 const EnvConfig& config = {});

// Stateful wrapper used by rollout workers.
class Environment {
 public:
  Environment(chem::FragmentMultiset library, std::shared_ptr<const energy::EnergyBackend> backend,
              EnvConfig config = {}, StartSpec start = {});

  const EnvState& reset(std::uint64_t seed);
  StepOutcome step(const Action& action);
  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  const chem::FragmentMultiset& library() const { return library_; }
  const energy::EnergyBackend& backend() const { return *backend_; }

 private:
  chem::FragmentMultiset library_;
  std::shared_ptr<const energy::EnergyBackend> backend_;
  EnvConfig config_;
  StartSpec start_;
  EnvState state_;
};

}  // namespace fragforge::env
