#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fragforge/chem/atom_cloud.hpp"

namespace fragforge::chem {

struct Fragment {
  std::string id;
  AtomCloud cloud;  // prior geometry, provenance set to the fragment index
  int initial_count = 1;
  std::vector<std::size_t> anchor_hydrogens;  // hydrogens with a heavy neighbour
};

// Published totals for a bundled set, kept for comparison only.
struct MultisetReference {
  std::string formula;
  int atoms = 0;
  int heavy_atoms = 0;
};

// Immutable catalog shared by every environment built from one manifest.
struct FragmentCatalog {
  std::string name;
  std::vector<Fragment> fragments;
  std::optional<MultisetReference> reference;
  std::uint64_t content_hash = 0;  // FNV-1a over manifest and fragment files
};

class FragmentMultiset {
 public:
  FragmentMultiset() = default;
  explicit FragmentMultiset(std::shared_ptr<const FragmentCatalog> catalog);

  std::size_t size() const { return catalog_ ? catalog_->fragments.size() : 0; }
  const Fragment& fragment(std::size_t f) const { return catalog_->fragments[f]; }
  const FragmentCatalog& catalog() const { return *catalog_; }
  const std::shared_ptr<const FragmentCatalog>& catalog_ptr() const { return catalog_; }

  int remaining(std::size_t f) const { return remaining_[f]; }
  const std::vector<int>& remaining() const { return remaining_; }
  int total_remaining() const;
  int total_initial() const;
  bool exhausted() const { return total_remaining() == 0; }

  // Throws ChemError when the fragment has no copies left.
  void take(std::size_t f);
  void reset();

  // Sum of every fragment copy's formula.
  Formula raw_formula() const;
  // Formula of the fully assembled molecule: one bond per placement after the
  // first, each removing two hydrogens.
  Formula assembled_formula() const;

 private:
  std::shared_ptr<const FragmentCatalog> catalog_;
  std::vector<int> remaining_;
};

// Remaining counts in manifest order (the x_F input of the multiset encoder).
std::vector<int> multiset_count_vector(const FragmentMultiset& ms);

// Manifest: YAML with `fragments: [{id, path, count}]`, optional `name` and
// `reference: {formula, atoms, heavy_atoms}`. Paths resolve relative to the
// manifest's directory.
FragmentMultiset load_fragment_library(const std::filesystem::path& manifest);

// Builds a multiset directly from clouds (ids and counts supplied).
FragmentMultiset make_multiset(std::string name, std::vector<Fragment> fragments);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);

}  // namespace fragforge::chem
