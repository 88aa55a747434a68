#pragma once

#include "fragforge/chem/bonds.hpp"
#include "fragforge/energy/backend.hpp"

namespace fragforge::energy {

// Harmonic bonds on perceived bonds plus 12-6 Lennard-Jones on every other
// pair. r0 = rcov_i + rcov_j, sigma = lj_sigma_scale * (r0 + lj_sigma_offset).
struct SurrogateParams {
  double k_bond = 100.0;         // kcal/mol/A^2
  double lj_epsilon = 0.1;       // kcal/mol
  double lj_sigma_scale = 0.9;
  double lj_sigma_offset = 1.5;  // A
  double bond_factor = chem::kDefaultBondFactor;

  void validate() const;
};

// Pair terms are summed in sorted order, so the result is bit-identical for
// any atom ordering.
double surrogate_energy(const chem::AtomCloud& cloud, const SurrogateParams& params = {});

class SurrogateBackend final : public EnergyBackend {
 public:
  explicit SurrogateBackend(SurrogateParams params = {}) : params_(params) { params_.validate(); }
  double evaluate(const chem::AtomCloud& cloud) const override {
    return surrogate_energy(cloud, params_);
  }
  std::string name() const override { return "surrogate"; }
  bool deterministic() const override { return true; }
  const SurrogateParams& params() const { return params_; }

 private:
  SurrogateParams params_;
};

}  // namespace fragforge::energy
