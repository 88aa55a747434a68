#include "fragforge/chem/atom_cloud.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "fragforge/error.hpp"

namespace fragforge::chem {

int Formula::total() const { return std::accumulate(counts_.begin(), counts_.end(), 0); }

Formula& Formula::operator+=(const Formula& other) {
  for (std::size_t i = 0; i < kNumElements; ++i) counts_[i] += other.counts_[i];
  return *this;
}

Formula Formula::operator*(int k) const {
  Formula out;
  for (std::size_t i = 0; i < kNumElements; ++i) out.counts_[i] = counts_[i] * k;
  return out;
}

std::string Formula::to_string() const {
  std::string out;
  auto emit = [&](Element e) {
    int n = count(e);
    if (n == 0) return;
    out += symbol(e);
    if (n > 1) out += std::to_string(n);
  };
  if (count(Element::C) > 0) {
    emit(Element::C);
    emit(Element::H);
    for (Element e : {Element::F, Element::N, Element::O, Element::S}) emit(e);
  } else {
    // Hill order without carbon is purely alphabetical.
    for (Element e : {Element::F, Element::H, Element::N, Element::O, Element::S}) emit(e);
  }
  return out;
}

Formula Formula::parse(const std::string& text) {
  Formula f;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isupper(static_cast<unsigned char>(text[i]))) {
      throw ParseError("bad formula '" + text + "'");
    }
    std::size_t j = i + 1;
    while (j < text.size() && std::islower(static_cast<unsigned char>(text[j]))) ++j;
    Element e = element_from_symbol(std::string_view(text).substr(i, j - i));
    std::size_t k = j;
    while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
    f.add(e, k > j ? std::stoi(text.substr(j, k - j)) : 1);
    i = k;
  }
  return f;
}

void AtomCloud::add(Element e, const Vec3& position, int provenance) {
  atoms_.push_back({e, position});
  provenance_.push_back(provenance);
}

void AtomCloud::set_provenance(int fragment) {
  std::fill(provenance_.begin(), provenance_.end(), fragment);
}

std::vector<std::size_t> AtomCloud::hydrogen_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (is_hydrogen(i)) out.push_back(i);
  }
  return out;
}

std::size_t AtomCloud::hydrogen_count() const {
  return static_cast<std::size_t>(std::count_if(
      atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.element == Element::H; }));
}

Formula AtomCloud::formula() const {
  Formula f;
  for (const Atom& a : atoms_) f.add(a.element);
  return f;
}

AtomCloud AtomCloud::without(std::size_t index) const {
  AtomCloud out;
  out.atoms_.reserve(atoms_.size());
  out.provenance_.reserve(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i == index) continue;
    out.atoms_.push_back(atoms_[i]);
    out.provenance_.push_back(provenance_[i]);
  }
  return out;
}

void AtomCloud::append(const AtomCloud& other) {
  atoms_.insert(atoms_.end(), other.atoms_.begin(), other.atoms_.end());
  provenance_.insert(provenance_.end(), other.provenance_.begin(), other.provenance_.end());
}

Vec3 AtomCloud::heavy_centroid() const {
  Vec3 sum = Vec3::Zero();
  std::size_t n = 0;
  for (const Atom& a : atoms_) {
    if (a.element == Element::H) continue;
    sum += a.position;
    ++n;
  }
  if (n == 0) {
    for (const Atom& a : atoms_) sum += a.position;
    n = atoms_.size();
  }
  return n == 0 ? sum : Vec3(sum / static_cast<double>(n));
}

bool AtomCloud::valid() const {
  try {
    validate();
  } catch (const ChemError&) {
    return false;
  }
  return true;
}

void AtomCloud::validate() const {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!atoms_[i].position.allFinite()) {
      throw ChemError("atom " + std::to_string(i) + " has a non-finite position");
    }
  }
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
      if (atoms_[i].position == atoms_[j].position) {
        throw ChemError("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                        " share coordinates");
      }
    }
  }
}

}  // namespace fragforge::chem
