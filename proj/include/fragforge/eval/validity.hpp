#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fragforge/chem/atom_cloud.hpp"
#include "fragforge/chem/bonds.hpp"

namespace fragforge::eval {

inline constexpr double kClashDistance = 0.6;

enum class ValidityReason { ok, disconnected, valence_exceeded, clash, incomplete };

std::string to_string(ValidityReason r);

// Rotation validity: no atom exceeds its maximum valence and no pair is closer
// than the clash distance. Bond validity additionally requires one connected
// component.
struct ValidityReport {
  bool rotation_valid = false;
  bool bond_valid = false;
  ValidityReason reason = ValidityReason::ok;
  std::vector<std::string> component_formulas;
};

ValidityReport classify_validity(const chem::AtomCloud& cloud,
                                 double bond_factor = chem::kDefaultBondFactor,
                                 double clash_distance = kClashDistance);

// Running valid/total counts; ratios are 0 while the history is empty.
class CumulativeValidity {
 public:
  void add(const ValidityReport& r);
  void merge(const CumulativeValidity& other);

  std::size_t total() const { return total_; }
  std::size_t rotation_valid() const { return rotation_; }
  std::size_t bond_valid() const { return bond_; }
  double rotation_ratio() const;
  double bond_ratio() const;

 private:
  std::size_t total_ = 0;
  std::size_t rotation_ = 0;
  std::size_t bond_ = 0;
};

struct ValidityRatios {
  double rotation = 0.0;
  double bond = 0.0;
  std::size_t count = 0;
};

ValidityRatios cumulative_valid_ratio(const std::vector<ValidityReport>& history);

}  // namespace fragforge::eval
