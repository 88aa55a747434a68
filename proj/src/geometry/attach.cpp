#include "fragforge/geometry/attach.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fragforge/error.hpp"

namespace fragforge::geometry {

namespace {

// Perpendicular offset below which a neighbour cannot define a torsion.
constexpr double kMinPerpendicular = 1e-3;

AnchorSide resolve_side(const chem::AtomCloud& cloud, std::size_t h, double bond_factor,
                        const char* which) {
  if (h >= cloud.size()) {
    throw ChemError(std::string(which) + " hydrogen index " + std::to_string(h) +
                    " out of range");
  }
  AnchorSide side;
  side.hydrogen = h;
  side.heavy = chem::heavy_anchor_of(cloud, h, bond_factor);
  side.hydrogen_position = cloud.position(h);
  return side;
}

void check_side(const chem::AtomCloud& cloud, const AnchorSide& side, const char* which) {
  if (side.hydrogen >= cloud.size() || side.heavy >= cloud.size() ||
      !cloud.is_hydrogen(side.hydrogen) || cloud.is_hydrogen(side.heavy)) {
    throw ChemError(std::string("invalid ") + which + " anchors");
  }
}

}  // namespace

AnchorPair make_anchor_pair(const chem::AtomCloud& mol, std::size_t mol_hydrogen,
                            const chem::AtomCloud& fragment, std::size_t frag_hydrogen,
                            double bond_factor) {
  return {resolve_side(mol, mol_hydrogen, bond_factor, "molecule"),
          resolve_side(fragment, frag_hydrogen, bond_factor, "fragment")};
}

std::optional<std::size_t> torsion_neighbor(const chem::AtomCloud& cloud, std::size_t anchor,
                                            std::size_t excluded, const Vec3& axis,
                                            double bond_factor) {
  const Vec3 u = axis.normalized();
  const Vec3& a = cloud.position(anchor);
  std::optional<std::size_t> best;
  bool best_heavy = false;
  double best_r = 0.0;
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    if (j == anchor || j == excluded) continue;
    const Vec3 rel = cloud.position(j) - a;
    const double r = rel.norm();
    if (r > chem::bond_threshold(cloud.element(anchor), cloud.element(j), bond_factor)) continue;
    if ((rel - rel.dot(u) * u).norm() < kMinPerpendicular) continue;
    const bool heavy = !cloud.is_hydrogen(j);
    if (!best || (heavy && !best_heavy) || (heavy == best_heavy && r < best_r)) {
      best = j;
      best_heavy = heavy;
      best_r = r;
    }
  }
  return best;
}

AttachResult attach_fragment(const chem::AtomCloud& mol, const chem::AtomCloud& fragment,
                             const AnchorPair& anchors, double distance, double abs_angle,
                             int sign, double bond_factor) {
  check_side(mol, anchors.molecule, "molecule");
  check_side(fragment, anchors.fragment, "fragment");
  if (!(distance > 0.0) || !std::isfinite(distance)) throw Error("attach: distance must be > 0");
  if (!(abs_angle >= 0.0 && abs_angle <= std::numbers::pi)) {
    throw Error("attach: |phi| must lie in [0, pi]");
  }
  if (sign != 1 && sign != -1) throw Error("attach: sign must be +1 or -1");

  const Vec3& a_m = mol.position(anchors.molecule.heavy);
  const Vec3 bond_axis = (anchors.molecule.hydrogen_position - a_m).normalized();
  const Vec3 target = a_m + distance * bond_axis;

  const Vec3& a_f = fragment.position(anchors.fragment.heavy);
  const Vec3 frag_valence = (anchors.fragment.hydrogen_position - a_f).normalized();

  // Point the fragment's vacated valence back along the new bond.
  RigidTransform align;
  align.rotation = Eigen::Quaterniond::FromTwoVectors(frag_valence, -bond_axis).toRotationMatrix();
  align.translation = target - align.rotation * a_f;

  AttachResult out;
  auto mol_neighbor =
      torsion_neighbor(mol, anchors.molecule.heavy, anchors.molecule.hydrogen, bond_axis,
                       bond_factor);
  auto frag_neighbor = torsion_neighbor(fragment, anchors.fragment.heavy,
                                        anchors.fragment.hydrogen, frag_valence, bond_factor);

  RigidTransform placement = align;
  if (mol_neighbor && frag_neighbor) {
    const double current = measure_dihedral(mol.position(*mol_neighbor), a_m, target,
                                            align.apply(fragment.position(*frag_neighbor)));
    const double wanted = sign * abs_angle;
    placement = RigidTransform::rotation_about(bond_axis, angle_difference(wanted, current), target) *
                align;
    out.torsion_applied = true;
  }
  out.placement = placement;

  const std::size_t vm = anchors.molecule.hydrogen;
  const std::size_t uf = anchors.fragment.hydrogen;
  auto shift = [](std::size_t idx, std::size_t removed) { return idx - (idx > removed ? 1 : 0); };

  out.molecule = mol.without(vm);
  out.fragment_offset = out.molecule.size();
  out.molecule.append(rigid_transform_apply(placement, fragment.without(uf)));
  out.molecule_anchor = shift(anchors.molecule.heavy, vm);
  out.fragment_anchor = out.fragment_offset + shift(anchors.fragment.heavy, uf);
  if (mol_neighbor) out.molecule_neighbor = shift(*mol_neighbor, vm);
  if (frag_neighbor) out.fragment_neighbor = out.fragment_offset + shift(*frag_neighbor, uf);
  return out;
}

}  // namespace fragforge::geometry
