#include "fragforge/chem/bonds.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fragforge/error.hpp"

namespace fragforge::chem {

void BondGraph::add_edge(std::size_t i, std::size_t j) {
  if (i == j || has_edge(i, j)) return;
  auto insert_sorted = [](std::vector<std::size_t>& v, std::size_t x) {
    v.insert(std::upper_bound(v.begin(), v.end(), x), x);
  };
  insert_sorted(adjacency_[i], j);
  insert_sorted(adjacency_[j], i);
}

bool BondGraph::has_edge(std::size_t i, std::size_t j) const {
  const auto& n = adjacency_[i];
  return std::binary_search(n.begin(), n.end(), j);
}

std::size_t BondGraph::edge_count() const {
  std::size_t sum = 0;
  for (const auto& n : adjacency_) sum += n.size();
  return sum / 2;
}

std::vector<std::size_t> BondGraph::component_labels() const {
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(adjacency_.size(), kUnset);
  std::size_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < adjacency_.size(); ++start) {
    if (label[start] != kUnset) continue;
    label[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w : adjacency_[v]) {
        if (label[w] == kUnset) {
          label[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return label;
}

std::size_t BondGraph::component_count() const {
  auto labels = component_labels();
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

BondGraph perceive_bonds(const AtomCloud& cloud, double factor) {
  BondGraph g(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      double r = (cloud.position(i) - cloud.position(j)).norm();
      if (r <= bond_threshold(cloud.element(i), cloud.element(j), factor)) g.add_edge(i, j);
    }
  }
  return g;
}

std::optional<std::size_t> find_heavy_anchor(const AtomCloud& cloud, std::size_t h_index,
                                             double factor) {
  if (h_index >= cloud.size() || !cloud.is_hydrogen(h_index)) return std::nullopt;
  std::optional<std::size_t> best;
  double best_r = 0.0;
  const Vec3& h = cloud.position(h_index);
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    if (cloud.is_hydrogen(j)) continue;
    double r = (cloud.position(j) - h).norm();
    if (r > bond_threshold(Element::H, cloud.element(j), factor)) continue;
    if (!best || r < best_r) {
      best = j;
      best_r = r;
    }
  }
  return best;
}

std::size_t heavy_anchor_of(const AtomCloud& cloud, std::size_t h_index, double factor) {
  if (h_index >= cloud.size()) {
    throw ChemError("atom index " + std::to_string(h_index) + " out of range");
  }
  if (!cloud.is_hydrogen(h_index)) {
    throw ChemError("atom " + std::to_string(h_index) + " is not a hydrogen");
  }
  auto anchor = find_heavy_anchor(cloud, h_index, factor);
  if (!anchor) {
    throw ChemError("hydrogen " + std::to_string(h_index) + " has no heavy neighbour");
  }
  return *anchor;
}

}  // namespace fragforge::chem
