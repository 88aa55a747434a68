#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "fragforge/chem/atom_cloud.hpp"
#include "fragforge/chem/fragment_library.hpp"
#include "fragforge/chem/xyz.hpp"
#include "fragforge/geometry/transform.hpp"
#include "fragforge/policy/model.hpp"

namespace fragforge::testing {

inline std::filesystem::path data_dir() { return FRAGFORGE_DATA_DIR; }

inline chem::FragmentMultiset load_set(const std::string& name) {
  return chem::load_fragment_library(data_dir() / "multisets" / (name + ".yaml"));
}

// Tetrahedral CH4 with C-H 1.09 A.
inline chem::AtomCloud methane(const chem::Vec3& at = chem::Vec3::Zero()) {
  const double a = 1.09 / std::sqrt(3.0);
  chem::AtomCloud c;
  c.add(chem::Element::C, at);
  c.add(chem::Element::H, at + chem::Vec3(a, a, a));
  c.add(chem::Element::H, at + chem::Vec3(a, -a, -a));
  c.add(chem::Element::H, at + chem::Vec3(-a, a, -a));
  c.add(chem::Element::H, at + chem::Vec3(-a, -a, a));
  return c;
}

// Staggered ethane, C-C 1.54 A, C-H 1.09 A, tetrahedral angles.
inline chem::AtomCloud ethane() {
  chem::AtomCloud c;
  const double cc = 1.54, ch = 1.09;
  const double theta = std::acos(-1.0 / 3.0);  // H-C-C angle
  c.add(chem::Element::C, {0, 0, 0});
  c.add(chem::Element::C, {0, 0, cc});
  for (int k = 0; k < 3; ++k) {
    const double phi = 2.0 * M_PI * k / 3.0;
    c.add(chem::Element::H, {ch * std::sin(theta) * std::cos(phi), ch * std::sin(theta) * std::sin(phi),
                             ch * std::cos(theta)});
    const double psi = phi + M_PI / 3.0;
    c.add(chem::Element::H, {ch * std::sin(theta) * std::cos(psi), ch * std::sin(theta) * std::sin(psi),
                             cc - ch * std::cos(theta)});
  }
  return c;
}

inline geometry::RigidTransform random_rigid(std::mt19937_64& rng, double spread = 5.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  geometry::RigidTransform t;
  t.rotation = q.toRotationMatrix();
  t.translation = chem::Vec3(n(rng), n(rng), n(rng)) * spread;
  return t;
}

// Every bundled fragment geometry, sorted by file name.
inline std::vector<chem::AtomCloud> bundled_fragments() {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(data_dir() / "fragments")) {
    if (e.path().extension() == ".xyz") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<chem::AtomCloud> out;
  for (const auto& f : files) out.push_back(chem::read_xyz_file(f));
  return out;
}

// Reduced network for fast tests; the architecture is the same.
inline policy::ModelConfig small_model(int n_fragments, std::uint64_t seed = 1) {
  policy::ModelConfig c;
  c.embedder.features = 8;
  c.embedder.filters = 12;
  c.embedder.n_basis = 10;
  c.embedder.interactions = 2;
  c.hidden = 16;
  c.multiset_features = 6;
  c.n_fragments = n_fragments;
  c.seed = seed;
  return c;
}

}  // namespace fragforge::testing
