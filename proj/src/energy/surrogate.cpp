#include "fragforge/energy/surrogate.hpp"

#include <algorithm>
#include <vector>

namespace fragforge::energy {

void SurrogateParams::validate() const {
  if (!(k_bond > 0 && lj_epsilon > 0 && lj_sigma_scale > 0 && lj_sigma_offset >= 0 &&
        bond_factor > 0)) {
    throw Error("surrogate parameters must be positive");
  }
}

double surrogate_energy(const chem::AtomCloud& cloud, const SurrogateParams& p) {
  std::vector<double> terms;
  terms.reserve(cloud.size() * (cloud.size() + 1) / 2);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      const chem::Element ei = cloud.element(i);
      const chem::Element ej = cloud.element(j);
      const double r = (cloud.position(i) - cloud.position(j)).norm();
      const double r0 = chem::covalent_radius(ei) + chem::covalent_radius(ej);
      if (r <= chem::bond_threshold(ei, ej, p.bond_factor)) {
        const double dr = r - r0;
        terms.push_back(p.k_bond * dr * dr);
      } else {
        const double sigma = p.lj_sigma_scale * (r0 + p.lj_sigma_offset);
        const double s2 = (sigma / r) * (sigma / r);
        const double s6 = s2 * s2 * s2;
        terms.push_back(4.0 * p.lj_epsilon * (s6 * s6 - s6));
      }
    }
  }
  std::sort(terms.begin(), terms.end());
  double e = 0.0;
  for (double t : terms) e += t;
  return e;
}

}  // namespace fragforge::energy
