#pragma once

#include "fragforge/energy/backend.hpp"

namespace fragforge::energy {

struct RewardTerms {
  double reward = 0.0;
  double next_energy = 0.0;      // E(M_{t+1})
  double molecule_energy = 0.0;  // E(M_t) without the anchoring hydrogen
  double fragment_energy = 0.0;  // E(fragment) at its prior geometry without its hydrogen
};

// Negative energy released relative to the two non-interacting building
// blocks: -(E(next) - (E(molecule) + E(fragment))).
RewardTerms step_reward(const chem::AtomCloud& molecule_without_h,
                        const chem::AtomCloud& fragment_without_h,
                        const chem::AtomCloud& next, const EnergyBackend& backend);

}  // namespace fragforge::energy
