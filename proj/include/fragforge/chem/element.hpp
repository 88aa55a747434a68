#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace fragforge::chem {

// Element order doubles as the one-hot feature index used by the embedders.
enum class Element : std::uint8_t { C = 0, H, N, O, F, S };

inline constexpr std::size_t kNumElements = 6;

struct ElementData {
  std::string_view symbol;
  int atomic_number;
  double covalent_radius;  // Angstrom, single-bond (Cordero et al. 2008)
  int max_valence;
};

const ElementData& element_data(Element e);

inline std::string_view symbol(Element e) { return element_data(e).symbol; }
inline double covalent_radius(Element e) { return element_data(e).covalent_radius; }
inline int max_valence(Element e) { return element_data(e).max_valence; }
inline bool is_hydrogen(Element e) { return e == Element::H; }

// Throws ChemError for anything outside {C,H,N,O,F,S}.
Element element_from_symbol(std::string_view sym);

inline std::size_t index_of(Element e) { return static_cast<std::size_t>(e); }

inline constexpr std::array<Element, kNumElements> kAllElements = {
    Element::C, Element::H, Element::N, Element::O, Element::F, Element::S};

}  // namespace fragforge::chem
