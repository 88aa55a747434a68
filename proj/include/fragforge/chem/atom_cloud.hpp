#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fragforge/chem/element.hpp"

namespace fragforge::chem {

using Vec3 = Eigen::Vector3d;

struct Atom {
  Element element;
  Vec3 position;
};

// Element counts with a Hill-order string form.
class Formula {
 public:
  Formula() { counts_.fill(0); }

  void add(Element e, int n = 1) { counts_[index_of(e)] += n; }
  int count(Element e) const { return counts_[index_of(e)]; }
  int total() const;
  int heavy() const { return total() - count(Element::H); }

  Formula& operator+=(const Formula& other);
  Formula operator*(int k) const;
  bool operator==(const Formula&) const = default;

  // "C14H22N4OS": carbon, hydrogen, then the rest alphabetically.
  std::string to_string() const;
  static Formula parse(const std::string& text);

 private:
  std::array<int, kNumElements> counts_;
};

// Ordered point cloud of atoms. Provenance optionally tags each atom with the
// index of the fragment it came from (-1 when unknown).
class AtomCloud {
 public:
  AtomCloud() = default;

  void add(Element e, const Vec3& position, int provenance = -1);

  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  const Atom& atom(std::size_t i) const { return atoms_[i]; }
  Element element(std::size_t i) const { return atoms_[i].element; }
  const Vec3& position(std::size_t i) const { return atoms_[i].position; }
  Vec3& position(std::size_t i) { return atoms_[i].position; }
  int provenance(std::size_t i) const { return provenance_[i]; }
  void set_provenance(int fragment);
  std::span<const Atom> atoms() const { return atoms_; }

  bool is_hydrogen(std::size_t i) const { return atoms_[i].element == Element::H; }
  std::vector<std::size_t> hydrogen_indices() const;
  std::size_t hydrogen_count() const;

  Formula formula() const;

  // Copy with atom `index` dropped; later indices shift down by one.
  AtomCloud without(std::size_t index) const;
  void append(const AtomCloud& other);

  // Heavy-atom centroid (all-atom centroid if there are no heavy atoms).
  Vec3 heavy_centroid() const;

  // True when every coordinate is finite and no two atoms coincide.
  bool valid() const;
  // Throws ChemError naming the offending atom.
  void validate() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<int> provenance_;
};

}  // namespace fragforge::chem
