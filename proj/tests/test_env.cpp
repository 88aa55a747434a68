#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "fragforge/energy/surrogate.hpp"
#include "fragforge/env/environment.hpp"
#include "support.hpp"

using namespace fragforge;
using namespace fragforge::env;
using fragforge::testing::load_set;
using chem::AtomCloud;

namespace {

// A legal random action (uniform over the masks and bounds).
Action random_action(const EnvState& s, std::mt19937_64& rng, const EnvConfig& cfg = {}) {
  auto masks = action_masks(s);
  auto pick = [&](const std::vector<bool>& m) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i]) idx.push_back(i);
    }
    return idx[rng() % idx.size()];
  };
  Action a;
  a.molecule_hydrogen = pick(masks.molecule_hydrogens);
  a.fragment = pick(masks.fragments);
  a.fragment_hydrogen = pick(masks.fragment_hydrogens[a.fragment]);
  a.distance = std::uniform_real_distribution<double>(cfg.min_distance, cfg.max_distance)(rng);
  a.abs_angle = std::uniform_real_distribution<double>(0, std::numbers::pi)(rng);
  a.sign = rng() % 2 ? 1 : -1;
  return a;
}

}  // namespace

TEST_CASE("reset with a fixed start") {
  auto lib = load_set("drug1");
  EnvState s = reset(lib, StartSpec::fixed(0), 1);
  CHECK(s.molecule.size() == 12);
  CHECK(s.molecule.formula().to_string() == "C4H6N2");
  CHECK(s.multiset.remaining() == std::vector<int>{0, 1, 1, 1});
  CHECK(s.step == 0);
  CHECK(s.placements == 1);
  CHECK_FALSE(s.terminal);
  CHECK(s.molecule.heavy_centroid().norm() < 1e-12);
  for (std::size_t i = 0; i < s.molecule.size(); ++i) CHECK(s.molecule.provenance(i) == 0);
}

TEST_CASE("random reset is reproducible and covers the set") {
  auto lib = load_set("drug1");
  std::set<std::vector<int>> seen;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    EnvState a = reset(lib, StartSpec::random(), seed);
    EnvState b = reset(lib, StartSpec::random(), seed);
    CHECK(a.multiset.remaining() == b.multiset.remaining());
    CHECK(a.molecule.formula() == b.molecule.formula());
    seen.insert(a.multiset.remaining());
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("reset errors") {
  chem::FragmentMultiset empty;
  CHECK_THROWS(reset(empty, StartSpec::random(), 0));
  auto lib = load_set("toy");
  CHECK_THROWS(reset(lib, StartSpec::fixed(7), 0));
  EnvState g = reset(lib, StartSpec::given(fragforge::testing::methane()), 0);
  CHECK(g.molecule.size() == 5);
  CHECK(g.multiset.total_remaining() == 3);
}

TEST_CASE("action masks") {
  auto lib = load_set("toy");
  EnvState s = reset(lib, StartSpec::fixed(0), 0);  // methane core
  auto m = action_masks(s);
  CHECK(m.molecule_hydrogens == std::vector<bool>{false, true, true, true, true});
  CHECK(m.fragments == std::vector<bool>{false, true, true});
  for (std::size_t f = 0; f < lib.size(); ++f) {
    const auto& cloud = lib.fragment(f).cloud;
    for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(m.fragment_hydrogens[f][i] == cloud.is_hydrogen(i));
  }

  auto d1 = load_set("drug1");
  EnvState t = reset(d1, StartSpec::fixed(1), 0);
  t.multiset.take(2);
  CHECK(action_masks(t).fragments == std::vector<bool>{true, false, false, true});
  t.terminal = true;
  CHECK_THROWS(action_masks(t));
}

TEST_CASE("step with a zero backend runs the full horizon") {
  auto lib = load_set("drug1");
  energy::ConstantBackend zero;
  std::mt19937_64 rng(2);
  int full = 0;
  for (int ep = 0; ep < 30; ++ep) {
    EnvState s = reset(lib, StartSpec::random(), rng());
    int atoms = 0;
    for (std::size_t f = 0; f < lib.size(); ++f) atoms += static_cast<int>(lib.fragment(f).cloud.size());
    StepOutcome out;
    do {
      out = step(s, random_action(s, rng), zero);
      if (!out.info.penalized) CHECK(out.reward == 0.0);
      CHECK(out.done == (out.info.penalized || out.next.multiset.exhausted()));
      s = out.next;
    } while (!out.done);
    CHECK(s.placements <= 4);
    if (!out.info.penalized) {
      ++full;
      CHECK(s.placements == 4);
      CHECK(static_cast<int>(s.molecule.size()) == atoms - 2 * (s.placements - 1));
    } else {
      CHECK(out.reward == -10.0);
    }
    CHECK_THROWS(step(s, Action{}, zero));
  }
  CHECK(full > 0);
}

TEST_CASE("overlapping placement is penalized") {
  // Place once on bare methane, then drop an obstacle atom onto the spot the
  // incoming nitrogen lands on and repeat the same action.
  auto lib = load_set("toy");
  energy::ConstantBackend zero;
  const Action a{1, 1, 1, 1.5, 1.0, 1};
  EnvState s = reset(lib, StartSpec::fixed(0), 0);
  auto clear = step(s, a, zero);
  CHECK_FALSE(clear.info.penalized);
  CHECK(clear.reward == 0.0);
  const chem::Vec3 landing = clear.next.molecule.position(4);  // methane loses H1, N comes next

  chem::AtomCloud mol = s.molecule;
  mol.add(chem::Element::F, landing + chem::Vec3(0.1, 0.0, 0.0));
  EnvState g = reset(lib, StartSpec::given(mol), 0);
  auto out = step(g, a, zero);
  CHECK(out.info.min_contact < 0.6);
  CHECK(out.reward == -10.0);
  CHECK(out.done);
  CHECK(out.info.penalized);
  CHECK(out.info.termination == Termination::too_close);
  CHECK(out.next.terminal);
}

TEST_CASE("illegal actions are rejected") {
  auto lib = load_set("toy");
  energy::ConstantBackend zero;
  EnvState s = reset(lib, StartSpec::fixed(0), 0);
  CHECK_THROWS_AS(step(s, Action{0, 1, 1, 1.5, 0.5, 1}, zero), IllegalAction);   // carbon
  CHECK_THROWS_AS(step(s, Action{1, 0, 1, 1.5, 0.5, 1}, zero), IllegalAction);   // exhausted
  CHECK_THROWS_AS(step(s, Action{1, 1, 0, 1.5, 0.5, 1}, zero), IllegalAction);   // N of ammonia
  CHECK_THROWS_AS(step(s, Action{9, 1, 1, 1.5, 0.5, 1}, zero), IllegalAction);   // out of range
  CHECK_THROWS_AS(step(s, Action{1, 1, 1, 2.5, 0.5, 1}, zero), IllegalAction);   // distance
  CHECK_THROWS_AS(step(s, Action{1, 1, 1, 1.5, 4.0, 1}, zero), IllegalAction);   // angle
  CHECK_THROWS_AS(step(s, Action{1, 1, 1, 1.5, 0.5, 0}, zero), IllegalAction);   // sign
}

TEST_CASE("transitions are deterministic") {
  auto lib = load_set("drug2");
  energy::SurrogateBackend sur;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    EnvState s = reset(lib, StartSpec::random(), rng());
    Action a = random_action(s, rng);
    auto x = step(s, a, sur), y = step(s, a, sur);
    CHECK(x.reward == y.reward);
    REQUIRE(x.next.molecule.size() == y.next.molecule.size());
    for (std::size_t k = 0; k < x.next.molecule.size(); ++k) CHECK(x.next.molecule.position(k) == y.next.molecule.position(k));
  }
}

TEST_CASE("random legal actions never raise") {
  auto lib = load_set("oled1");
  energy::ConstantBackend zero;
  std::mt19937_64 rng(12);
  EnvState s = reset(lib, StartSpec::random(), 1);
  for (int i = 0; i < 2000; ++i) {
    auto out = step(s, random_action(s, rng), zero);
    s = out.done ? reset(lib, StartSpec::random(), rng()) : out.next;
  }
}

TEST_CASE("Environment wrapper") {
  auto lib = load_set("toy");
  Environment e(lib, std::make_shared<energy::SurrogateBackend>(), {}, StartSpec::fixed(2));
  e.reset(3);
  CHECK(e.state().molecule.formula().to_string() == "H2O");
  std::mt19937_64 rng(1);
  auto out = e.step(random_action(e.state(), rng));
  CHECK(e.state().step == 1);
  CHECK(std::isfinite(out.reward));
}
