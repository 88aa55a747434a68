#include "fragforge/chem/element.hpp"

#include <string>

#include "fragforge/error.hpp"

namespace fragforge::chem {

namespace {

constexpr std::array<ElementData, kNumElements> kTable = {{
    {"C", 6, 0.76, 4},
    {"H", 1, 0.31, 1},
    {"N", 7, 0.71, 3},
    {"O", 8, 0.66, 2},
    {"F", 9, 0.57, 1},
    {"S", 16, 1.05, 6},
}};

}  // namespace

const ElementData& element_data(Element e) { return kTable[index_of(e)]; }

Element element_from_symbol(std::string_view sym) {
  for (Element e : kAllElements) {
    if (kTable[index_of(e)].symbol == sym) return e;
  }
  throw ChemError("unknown element symbol '" + std::string(sym) + "'");
}

}  // namespace fragforge::chem
