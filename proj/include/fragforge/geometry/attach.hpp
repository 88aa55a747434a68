#pragma once

#include <cstddef>
#include <optional>

#include "fragforge/chem/atom_cloud.hpp"
#include "fragforge/chem/bonds.hpp"
#include "fragforge/geometry/transform.hpp"

namespace fragforge::geometry {

// One side of the new bond: the hydrogen that leaves and the heavy atom that
// keeps its valence.
struct AnchorSide {
  std::size_t hydrogen = 0;
  std::size_t heavy = 0;
  Vec3 hydrogen_position = Vec3::Zero();
};

struct AnchorPair {
  AnchorSide molecule;
  AnchorSide fragment;
};

// Resolves heavy anchors for the chosen hydrogens; throws ChemError if either
// index is not a hydrogen with a heavy neighbour.
AnchorPair make_anchor_pair(const chem::AtomCloud& mol, std::size_t mol_hydrogen,
                            const chem::AtomCloud& fragment, std::size_t frag_hydrogen,
                            double bond_factor = chem::kDefaultBondFactor);

// Neighbour of `anchor` used to define the placement torsion: the nearest
// bonded heavy atom, else the nearest bonded hydrogen, skipping `excluded` and
// atoms collinear with `axis`. Ties go to the lowest index.
std::optional<std::size_t> torsion_neighbor(const chem::AtomCloud& cloud, std::size_t anchor,
                                            std::size_t excluded, const Vec3& axis,
                                            double bond_factor = chem::kDefaultBondFactor);

struct AttachResult {
  chem::AtomCloud molecule;   // mol minus its hydrogen, then the placed fragment minus its hydrogen
  std::size_t fragment_offset = 0;  // index of the first fragment atom in `molecule`
  std::size_t molecule_anchor = 0;  // a_M in `molecule`
  std::size_t fragment_anchor = 0;  // a_f in `molecule`
  std::optional<std::size_t> molecule_neighbor;  // n_M in `molecule`
  std::optional<std::size_t> fragment_neighbor;  // n_f in `molecule`
  bool torsion_applied = false;
  RigidTransform placement;  // maps fragment prior coordinates to placed ones
};

// Places `fragment` rigidly so that a_f sits at distance `distance` from a_M
// along the vacated a_M -> H direction, the fragment's own vacated valence
// points back at a_M, and the torsion (n_M, a_M, a_f, n_f) equals
// sign * abs_angle. If either neighbour is missing the torsion step is
// skipped and `torsion_applied` is false.
AttachResult attach_fragment(const chem::AtomCloud& mol, const chem::AtomCloud& fragment,
                             const AnchorPair& anchors, double distance, double abs_angle,
                             int sign, double bond_factor = chem::kDefaultBondFactor);

}  // namespace fragforge::geometry
