#include "fragforge/energy/reward.hpp"

namespace fragforge::energy {

RewardTerms step_reward(const chem::AtomCloud& molecule_without_h,
                        const chem::AtomCloud& fragment_without_h,
                        const chem::AtomCloud& next, const EnergyBackend& backend) {
  RewardTerms t;
  t.next_energy = backend.evaluate(next);
  t.molecule_energy = backend.evaluate(molecule_without_h);
  t.fragment_energy = backend.evaluate(fragment_without_h);
  t.reward = -(t.next_energy - (t.molecule_energy + t.fragment_energy));
  return t;
}

}  // namespace fragforge::energy
