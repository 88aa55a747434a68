#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fragforge/chem/atom_cloud.hpp"

namespace fragforge::chem {

inline constexpr double kDefaultBondFactor = 1.3;

// Undirected connectivity over atom indices.
class BondGraph {
 public:
  explicit BondGraph(std::size_t n = 0) : adjacency_(n) {}

  void add_edge(std::size_t i, std::size_t j);
  bool has_edge(std::size_t i, std::size_t j) const;

  std::size_t size() const { return adjacency_.size(); }
  std::size_t degree(std::size_t i) const { return adjacency_[i].size(); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_[i]; }
  std::size_t edge_count() const;

  // Component label per atom, labels numbered from 0 in order of first atom.
  std::vector<std::size_t> component_labels() const;
  std::size_t component_count() const;
  bool connected() const { return component_count() <= 1; }

 private:
  std::vector<std::vector<std::size_t>> adjacency_;  // sorted ascending
};

inline double bond_threshold(Element a, Element b, double factor = kDefaultBondFactor) {
  return factor * (covalent_radius(a) + covalent_radius(b));
}

// Edge (i,j) iff |r_i - r_j| <= factor * (rcov_i + rcov_j).
BondGraph perceive_bonds(const AtomCloud& cloud, double factor = kDefaultBondFactor);

// Heavy atom bonded to hydrogen `h_index`; the nearest one if several, lowest
// index on exact ties. Throws ChemError if the atom is not a hydrogen or has
// no heavy neighbour.
std::size_t heavy_anchor_of(const AtomCloud& cloud, std::size_t h_index,
                            double factor = kDefaultBondFactor);

// Non-throwing variant used for mask construction.
std::optional<std::size_t> find_heavy_anchor(const AtomCloud& cloud, std::size_t h_index,
                                             double factor = kDefaultBondFactor);

}  // namespace fragforge::chem
