#include "fragforge/chem/fragment_library.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <numeric>
#include <sstream>

#include "fragforge/chem/bonds.hpp"
#include "fragforge/chem/xyz.hpp"
#include "fragforge/error.hpp"

namespace fragforge::chem {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

FragmentMultiset::FragmentMultiset(std::shared_ptr<const FragmentCatalog> catalog)
    : catalog_(std::move(catalog)) {
  reset();
}

int FragmentMultiset::total_remaining() const {
  return std::accumulate(remaining_.begin(), remaining_.end(), 0);
}

int FragmentMultiset::total_initial() const {
  int n = 0;
  for (const auto& f : catalog_->fragments) n += f.initial_count;
  return n;
}

void FragmentMultiset::take(std::size_t f) {
  if (f >= size() || remaining_[f] <= 0) {
    throw ChemError("fragment " + std::to_string(f) + " is not available");
  }
  --remaining_[f];
}

void FragmentMultiset::reset() {
  remaining_.clear();
  if (!catalog_) return;
  for (const auto& f : catalog_->fragments) remaining_.push_back(f.initial_count);
}

Formula FragmentMultiset::raw_formula() const {
  Formula total;
  for (const auto& f : catalog_->fragments) total += f.cloud.formula() * f.initial_count;
  return total;
}

Formula FragmentMultiset::assembled_formula() const {
  Formula total = raw_formula();
  int bonds = std::max(0, total_initial() - 1);
  total.add(Element::H, -2 * bonds);
  return total;
}

std::vector<int> multiset_count_vector(const FragmentMultiset& ms) { return ms.remaining(); }

namespace {

Fragment finish_fragment(Fragment frag, std::size_t index) {
  if (frag.initial_count < 1) {
    throw ChemError("fragment '" + frag.id + "': count must be >= 1");
  }
  if (frag.cloud.size() < 2) {
    throw ChemError("fragment '" + frag.id + "': needs at least two atoms");
  }
  frag.cloud.validate();
  frag.cloud.set_provenance(static_cast<int>(index));
  frag.anchor_hydrogens.clear();
  for (std::size_t h : frag.cloud.hydrogen_indices()) {
    if (find_heavy_anchor(frag.cloud, h)) frag.anchor_hydrogens.push_back(h);
  }
  if (frag.anchor_hydrogens.empty()) {
    throw ChemError("fragment '" + frag.id + "' has no hydrogen bonded to a heavy atom");
  }
  return frag;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

FragmentMultiset make_multiset(std::string name, std::vector<Fragment> fragments) {
  auto catalog = std::make_shared<FragmentCatalog>();
  catalog->name = std::move(name);
  if (fragments.empty()) throw ChemError("multiset has no fragments");
  std::uint64_t h = fnv1a64(catalog->name);
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    catalog->fragments.push_back(finish_fragment(std::move(fragments[i]), i));
    const auto& f = catalog->fragments.back();
    h = fnv1a64(f.id + ":" + std::to_string(f.initial_count), h);
    for (const auto& a : f.cloud.atoms()) {
      h = fnv1a64(std::string_view(reinterpret_cast<const char*>(a.position.data()),
                                   3 * sizeof(double)),
                  fnv1a64(symbol(a.element), h));
    }
  }
  catalog->content_hash = h;
  return FragmentMultiset(std::move(catalog));
}

FragmentMultiset load_fragment_library(const std::filesystem::path& manifest) {
  if (!std::filesystem::exists(manifest)) {
    throw Error("fragment manifest not found: " + manifest.string());
  }
  std::string text = slurp(manifest);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(manifest.string() + ": " + e.what());
  }
  const auto base = manifest.parent_path();
  std::string name = root["name"] ? root["name"].as<std::string>() : manifest.stem().string();

  if (!root["fragments"] || !root["fragments"].IsSequence()) {
    throw ParseError(manifest.string() + ": missing 'fragments' list");
  }
  std::vector<Fragment> fragments;
  std::uint64_t file_hash = fnv1a64(text);
  try {
    for (const auto& entry : root["fragments"]) {
      Fragment f;
      f.id = entry["id"].as<std::string>();
      auto rel = entry["path"].as<std::string>();
      f.initial_count = entry["count"] ? entry["count"].as<int>() : 1;
      auto path = base / rel;
      if (!std::filesystem::exists(path)) {
        throw Error("fragment '" + f.id + "': file not found: " + path.string());
      }
      file_hash = fnv1a64(slurp(path), file_hash);
      f.cloud = read_xyz_file(path);
      fragments.push_back(std::move(f));
    }
  } catch (const YAML::Exception& e) {
    throw ParseError(manifest.string() + ": " + e.what());
  }

  auto ms = make_multiset(std::move(name), std::move(fragments));
  auto catalog = std::make_shared<FragmentCatalog>(ms.catalog());
  catalog->content_hash = file_hash;
  if (const auto& ref = root["reference"]) {
    MultisetReference r;
    r.formula = ref["formula"].as<std::string>();
    r.atoms = ref["atoms"].as<int>();
    r.heavy_atoms = ref["heavy_atoms"].as<int>();
    catalog->reference = r;
  }
  return FragmentMultiset(std::move(catalog));
}

}  // namespace fragforge::chem
