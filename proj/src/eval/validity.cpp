#include "fragforge/eval/validity.hpp"

#include <algorithm>

namespace fragforge::eval {

std::string to_string(ValidityReason r) {
  switch (r) {
    case ValidityReason::ok: return "ok";
    case ValidityReason::disconnected: return "disconnected";
    case ValidityReason::valence_exceeded: return "valence-exceeded";
    case ValidityReason::clash: return "clash";
    case ValidityReason::incomplete: return "incomplete";
  }
  return "unknown";
}

ValidityReport classify_validity(const chem::AtomCloud& cloud, double bond_factor,
                                 double clash_distance) {
  ValidityReport report;
  const auto graph = chem::perceive_bonds(cloud, bond_factor);

  bool clash = false;
  for (std::size_t i = 0; i < cloud.size() && !clash; ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      if ((cloud.position(i) - cloud.position(j)).norm() < clash_distance) {
        clash = true;
        break;
      }
    }
  }
  bool valence_ok = true;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (graph.degree(i) > static_cast<std::size_t>(chem::max_valence(cloud.element(i)))) {
      valence_ok = false;
      break;
    }
  }

  const auto labels = graph.component_labels();
  const std::size_t n_components =
      labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<chem::Formula> formulas(n_components);
  for (std::size_t i = 0; i < cloud.size(); ++i) formulas[labels[i]].add(cloud.element(i));
  for (const auto& f : formulas) report.component_formulas.push_back(f.to_string());

  report.rotation_valid = !clash && valence_ok;
  report.bond_valid = report.rotation_valid && n_components <= 1;
  if (clash) {
    report.reason = ValidityReason::clash;
  } else if (!valence_ok) {
    report.reason = ValidityReason::valence_exceeded;
  } else if (n_components > 1) {
    report.reason = ValidityReason::disconnected;
  }
  return report;
}

void CumulativeValidity::add(const ValidityReport& r) {
  ++total_;
  if (r.rotation_valid) ++rotation_;
  if (r.bond_valid) ++bond_;
}

void CumulativeValidity::merge(const CumulativeValidity& other) {
  total_ += other.total_;
  rotation_ += other.rotation_;
  bond_ += other.bond_;
}

double CumulativeValidity::rotation_ratio() const {
  return total_ == 0 ? 0.0 : static_cast<double>(rotation_) / static_cast<double>(total_);
}

double CumulativeValidity::bond_ratio() const {
  return total_ == 0 ? 0.0 : static_cast<double>(bond_) / static_cast<double>(total_);
}

ValidityRatios cumulative_valid_ratio(const std::vector<ValidityReport>& history) {
  CumulativeValidity acc;
  for (const auto& r : history) acc.add(r);
  return {acc.rotation_ratio(), acc.bond_ratio(), acc.total()};
}

}  // namespace fragforge::eval
