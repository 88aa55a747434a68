#include <doctest.h>

#include <cmath>
#include <random>

#include "fragforge/energy/surrogate.hpp"
#include "fragforge/policy/policy.hpp"
#include "fragforge/trainer/gae.hpp"
#include "fragforge/trainer/ppo.hpp"
#include "fragforge/trainer/rollout.hpp"
#include "fragforge/trainer/trainer.hpp"
#include "support.hpp"

using namespace fragforge;
using namespace fragforge::trainer;
using fragforge::testing::load_set;
using fragforge::testing::small_model;

namespace {

// A_t = sum_l (gamma lambda)^l delta_{t+l}, cut after the first done.
std::vector<double> brute_force_gae(const std::vector<double>& r, const std::vector<double>& v,
                                    const std::vector<bool>& done, double gamma, double lambda,
                                    double bootstrap) {
  const std::size_t n = r.size();
  auto value_at = [&](std::size_t k) { return k < n ? v[k] : bootstrap; };
  std::vector<double> adv(n);
  for (std::size_t t = 0; t < n; ++t) {
    double a = 0.0, w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      const double delta = r[k] + (done[k] ? 0.0 : gamma * value_at(k + 1)) - v[k];
      a += w * delta;
      if (done[k]) break;
      w *= gamma * lambda;
    }
    adv[t] = a;
  }
  return adv;
}

struct Sequence {
  std::vector<double> r, v;
  std::vector<bool> done;
  double bootstrap;
};

Sequence random_sequence(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 20);
  std::normal_distribution<double> n(0.0, 3.0);
  Sequence s;
  const int L = len(rng);
  for (int i = 0; i < L; ++i) {
    s.r.push_back(n(rng));
    s.v.push_back(n(rng));
    s.done.push_back(rng() % 4 == 0);
  }
  s.bootstrap = n(rng);
  return s;
}

env::Environment toy_env() {
  return env::Environment(load_set("toy"), std::make_shared<energy::SurrogateBackend>());
}

}  // namespace

TEST_CASE("GAE equals the brute-force sum") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    auto s = random_sequence(rng);
    const double gamma = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
    const double lambda = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto got = gae_advantages(s.r, s.v, s.done, gamma, lambda, s.bootstrap);
    auto want = brute_force_gae(s.r, s.v, s.done, gamma, lambda, s.bootstrap);
    for (std::size_t t = 0; t < s.r.size(); ++t) {
      CHECK(std::abs(got.advantages[t] - want[t]) <= 1e-12 * std::max(1.0, std::abs(want[t])));
      CHECK(got.targets[t] == doctest::Approx(got.advantages[t] + s.v[t]).epsilon(1e-15));
    }
  }
}

TEST_CASE("GAE special cases") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = random_sequence(rng);
    const std::size_t n = s.r.size();
    auto td = gae_advantages(s.r, s.v, s.done, 0.9, 0.0, s.bootstrap);
    for (std::size_t t = 0; t < n; ++t) {
      const double next = t + 1 < n ? s.v[t + 1] : s.bootstrap;
      CHECK(td.advantages[t] == s.r[t] + (s.done[t] ? 0.0 : 0.9 * next) - s.v[t]);
    }
    // lambda = gamma = 1: Monte Carlo return minus the baseline.
    auto mc = gae_advantages(s.r, s.v, s.done, 1.0, 1.0, s.bootstrap);
    for (std::size_t t = 0; t < n; ++t) {
      double g = 0.0;
      std::size_t k = t;
      for (; k < n; ++k) {
        g += s.r[k];
        if (s.done[k]) break;
      }
      if (k == n) g += s.bootstrap;
      CHECK(std::abs(mc.advantages[t] - (g - s.v[t])) <= 1e-12 * std::max(1.0, std::abs(g)));
    }
  }
  CHECK(gae_advantages({}, {}, {}, 1.0, 0.97).advantages.empty());
  CHECK_THROWS(gae_advantages({1.0}, {}, {false}, 1.0, 0.97));
}

TEST_CASE("clipped surrogate examples") {
  nn::Graph g;
  CHECK(g.item(clipped_surrogate(g, g.scalar(1.0), 0.7, 0.2)) == 0.7);
  CHECK(g.item(clipped_surrogate(g, g.scalar(1.5), 1.0, 0.2)) == 1.2);
  CHECK(g.item(clipped_surrogate(g, g.scalar(0.5), -1.0, 0.2)) == -0.8);
  CHECK(g.item(clipped_surrogate(g, g.scalar(1.5), -1.0, 0.2)) == -1.5);
  CHECK(g.item(clipped_surrogate(g, g.scalar(0.5), 1.0, 0.2)) == 0.5);
}

TEST_CASE("clipped branch has zero ratio gradient") {
  nn::ParameterSet ps;
  const nn::ParamId r = ps.add("ratio", nn::Tensor::Constant(1, 1, 1.5));
  auto grad_at = [&](double ratio, double adv) {
    ps.value(r)(0, 0) = ratio;
    nn::Gradients grads = ps.zeros_like();
    nn::Graph g(&ps);
    g.backward(clipped_surrogate(g, g.param(r), adv, 0.2), grads);
    return grads[0](0, 0);
  };
  CHECK(grad_at(1.5, 1.0) == 0.0);
  CHECK(grad_at(0.5, -1.0) == 0.0);
  CHECK(grad_at(1.5, -1.0) == -1.0);
  CHECK(grad_at(0.5, 1.0) == 1.0);
  CHECK(grad_at(1.1, 2.0) == 2.0);
}

TEST_CASE("at ratio one the policy term is the vanilla policy gradient") {
  auto lib = load_set("toy");
  policy::PolicyModel m(small_model(3, 7));
  std::mt19937_64 rng(1);
  env::EnvState s = env::reset(lib, env::StartSpec::fixed(1), 0);
  auto sa = policy::sample_action(m, s, rng);
  Transition t;
  t.state = s;
  t.action = sa.action;
  t.log_prob = sa.log_prob;
  t.advantage = -0.8;
  PPOConfig cfg;
  cfg.value_coef = 0.0;
  cfg.entropy_coef = 0.0;
  const Transition* batch[] = {&t};
  nn::Gradients ppo = m.params().zeros_like();
  auto parts = ppo_objective(m, batch, cfg, &ppo);
  CHECK(parts.clip_fraction == 0.0);
  CHECK(parts.approx_kl == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  nn::Gradients pg = m.params().zeros_like();
  nn::Graph g(&m.params());
  auto trace = policy::trace_policy(g, m, s, &sa.action, nullptr, false);
  g.backward(g.scale(trace.log_prob, -t.advantage), pg);
  for (std::size_t p = 0; p < pg.size(); ++p) {
    CHECK((ppo[p] - pg[p]).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, pg[p].cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("objective does not depend on the chunking") {
  auto lib = load_set("toy");
  policy::PolicyModel m(small_model(3, 2));
  std::vector<RolloutWorker> workers = make_workers(toy_env(), 2, 5);
  RolloutBatch batch;
  collect_rollouts(m, workers, 12, 0, batch);
  compute_advantages(m, workers, batch, 1.0, 0.97);
  std::vector<const Transition*> ptrs;
  for (auto& w : batch.per_worker) {
    for (auto& t : w) ptrs.push_back(&t);
  }
  PPOConfig a, b;
  a.grad_chunks = 1;
  b.grad_chunks = 5;
  nn::Gradients ga = m.params().zeros_like(), gb = m.params().zeros_like();
  auto pa = ppo_objective(m, ptrs, a, &ga);
  auto pb = ppo_objective(m, ptrs, b, &gb);
  CHECK(pa.total == doctest::Approx(pb.total).epsilon(1e-13));
  for (std::size_t p = 0; p < ga.size(); ++p) CHECK(ga[p].isApprox(gb[p], 1e-12));
}

TEST_CASE("Adam first step moves by the learning rate") {
  nn::ParameterSet ps;
  ps.add("w", (nn::Tensor(1, 3) << 1.0, 2.0, 3.0).finished());
  Adam opt(ps, 0.1);
  nn::Gradients g{(nn::Tensor(1, 3) << 0.5, -2.0, 0.0).finished()};
  opt.step(ps, g);
  CHECK(opt.steps() == 1);
  CHECK(ps.value(0)(0, 0) == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(ps.value(0)(0, 1) == doctest::Approx(2.1).epsilon(1e-7));
  CHECK(ps.value(0)(0, 2) == 3.0);
  // Oracle for the second step.
  nn::Gradients g2{(nn::Tensor(1, 3) << 1.0, 1.0, 1.0).finished()};
  opt.step(ps, g2);
  const double m = 0.9 * 0.1 * 0.5 + 0.1 * 1.0, v = 0.999 * 0.001 * 0.25 + 0.001 * 1.0;
  const double step = 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  CHECK(ps.value(0)(0, 0) == doctest::Approx(0.9 - step).epsilon(1e-6));
}

TEST_CASE("rollout collection bookkeeping") {
  policy::PolicyModel m(small_model(3, 3));
  auto workers = make_workers(toy_env(), 3, 100);
  RolloutBatch batch;
  collect_rollouts(m, workers, 10, 40, batch);
  REQUIRE(batch.per_worker.size() == 3);
  CHECK(batch.per_worker[0].size() == 4);
  CHECK(batch.per_worker[1].size() == 3);
  CHECK(batch.per_worker[2].size() == 3);
  CHECK(batch.size() == 10);
  for (std::size_t i = 1; i < batch.episodes.size(); ++i) {
    CHECK(batch.episodes[i - 1].end_step <= batch.episodes[i].end_step);
  }
  for (const auto& e : batch.episodes) {
    CHECK(e.end_step >= 40);
    CHECK(e.end_step < 50);
    CHECK((e.end_step - 40) % 3 == e.worker);
  }
  for (const auto& w : batch.per_worker) {
    for (const auto& t : w) {
      CHECK(std::isfinite(t.log_prob));
      CHECK(std::isfinite(t.value));
    }
  }

  // Same seeds, same transitions.
  auto again = make_workers(toy_env(), 3, 100);
  RolloutBatch b2;
  collect_rollouts(m, again, 10, 40, b2);
  for (std::size_t w = 0; w < 3; ++w) {
    for (std::size_t k = 0; k < batch.per_worker[w].size(); ++k) {
      CHECK(batch.per_worker[w][k].action == b2.per_worker[w][k].action);
      CHECK(batch.per_worker[w][k].reward == b2.per_worker[w][k].reward);
    }
  }
}

TEST_CASE("advantages bootstrap at segment ends") {
  policy::PolicyModel m(small_model(3, 3));
  auto workers = make_workers(toy_env(), 1, 9);
  RolloutBatch batch;
  collect_rollouts(m, workers, 7, 0, batch);
  compute_advantages(m, workers, batch, 1.0, 0.97);
  const auto& ts = batch.per_worker[0];
  std::vector<double> r, v;
  std::vector<bool> d;
  for (const auto& t : ts) {
    r.push_back(t.reward);
    v.push_back(t.value);
    d.push_back(t.done);
  }
  const double boot = ts.back().done ? 0.0 : policy::state_value(m, workers[0].state());
  auto want = brute_force_gae(r, v, d, 1.0, 0.97, boot);
  for (std::size_t k = 0; k < ts.size(); ++k) CHECK(ts[k].advantage == doctest::Approx(want[k]).epsilon(1e-12));
}

TEST_CASE("evaluation schedule") {
  PPOConfig cfg;
  auto pts = evaluation_points(cfg);
  CHECK(pts.size() == 50);
  CHECK(pts.front() == 100);
  CHECK(pts[1] == 1100);
  CHECK(pts.back() == 49100);
  cfg.total_steps = 0;
  CHECK(evaluation_points(cfg).empty());
  cfg.total_steps = 100;
  CHECK(evaluation_points(cfg) == std::vector<long>{100});
}

TEST_CASE("config validation") {
  PPOConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.gae_lambda = 1.5;
  CHECK_THROWS(cfg.validate());
  cfg = PPOConfig();
  cfg.minibatch_size = 0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("zero-step training returns the initial model") {
  TrainConfig tc;
  tc.ppo.total_steps = 0;
  tc.model = small_model(0, 4);
  auto lib = load_set("toy");
  auto res = train(tc, lib, std::make_shared<energy::SurrogateBackend>());
  CHECK(res.steps == 0);
  CHECK(res.updates == 0);
  CHECK(res.episodes.empty());
  auto cfg = small_model(3, 4);
  CHECK(res.model->params() == policy::PolicyModel(cfg).params());
}

TEST_CASE("short training run is reproducible") {
  TrainConfig tc;
  tc.ppo.total_steps = 120;
  tc.ppo.segment_steps = 60;
  tc.ppo.workers = 3;
  tc.ppo.minibatch_size = 20;
  tc.ppo.epochs = 2;
  tc.eval_samples = 2;
  tc.model = small_model(0, 5);
  tc.seed = 5;
  auto lib = load_set("toy");
  auto backend = std::make_shared<energy::SurrogateBackend>();
  auto a = train(tc, lib, backend);
  auto b = train(tc, lib, backend);
  CHECK(a.steps == 120);
  CHECK(a.updates == 2 * 2 * 3);
  CHECK(a.metrics.size() == 1);
  CHECK(a.metrics[0]["step"] == 100);
  CHECK(a.model->params() == b.model->params());
  CHECK(a.episodes.size() == b.episodes.size());
}
