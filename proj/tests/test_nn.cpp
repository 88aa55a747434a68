#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>

#include "fragforge/geometry/transform.hpp"
#include "fragforge/nn/checkpoint.hpp"
#include "fragforge/nn/graph.hpp"
#include "fragforge/nn/layers.hpp"
#include "support.hpp"

using namespace fragforge;
using namespace fragforge::nn;

namespace {

Tensor random_tensor(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(r, c);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = n(rng);
  return t;
}

// Central differences over every parameter entry against backward().
void check_gradients(ParameterSet& params, const std::function<Var(Graph&)>& f, double tol = 1e-6) {
  Gradients grads = params.zeros_like();
  {
    Graph g(&params);
    g.backward(f(g), grads);
  }
  const double h = 1e-6;
  for (ParamId p = 0; p < params.size(); ++p) {
    Tensor& t = params.value(p);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double keep = t.data()[i];
      t.data()[i] = keep + h;
      double up, down;
      {
        Graph g(&params, false);
        up = g.item(f(g));
      }
      t.data()[i] = keep - h;
      {
        Graph g(&params, false);
        down = g.item(f(g));
      }
      t.data()[i] = keep;
      const double fd = (up - down) / (2 * h);
      const double an = grads[p].data()[i];
      INFO(params.name(p), "[", i, "] analytic ", an, " numeric ", fd);
      CHECK(std::abs(an - fd) <= tol * std::max(1.0, std::abs(fd)));
    }
  }
}

}  // namespace

TEST_CASE("radial basis and cutoff") {
  const int n = 64;
  const double cutoff = 5.0, dmu = cutoff / (n - 1), gamma = 1.0 / (2 * dmu * dmu);
  for (double d : {0.0, 0.37, 1.5, 4.99}) {
    auto e = rbf_expand(d, n, cutoff);
    REQUIRE(e.size() == n);
    for (int k = 0; k < n; ++k) {
      const double mu = k * dmu;
      CHECK(e[k] == doctest::Approx(std::exp(-gamma * (d - mu) * (d - mu))).epsilon(1e-14));
    }
  }
  CHECK(rbf_expand(0.0, n, cutoff)[0] == 1.0);
  CHECK(cosine_cutoff(0.0, 5.0) == 1.0);
  CHECK(cosine_cutoff(2.5, 5.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cosine_cutoff(5.0, 5.0) == doctest::Approx(0.0));
  CHECK(cosine_cutoff(7.0, 5.0) == 0.0);
}

TEST_CASE("forward values of basic ops") {
  Graph g;
  Tensor a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0.5, -1, 2, 0;
  Var x = g.constant(a), y = g.constant(b);
  Tensor ab = a * b;
  CHECK(g.value(g.matmul(x, y)).isApprox(ab));
  CHECK(g.item(g.sum(x)) == 10.0);
  CHECK(g.item(g.mean(y)) == 0.375);
  CHECK(g.value(g.relu(y))(0, 1) == 0.0);
  CHECK(g.value(g.shifted_softplus(g.scalar(0.0)))(0, 0) == doctest::Approx(0.0));
  CHECK(g.item(g.sigmoid(g.scalar(0.0))) == 0.5);
  CHECK(g.item(g.log_sigmoid(g.scalar(-800.0))) == doctest::Approx(-800.0));
  CHECK(std::isfinite(g.item(g.log_sigmoid(g.scalar(800.0)))));
  CHECK(g.item(g.minimum(g.scalar(2.0), g.scalar(-1.0))) == -1.0);
  CHECK(g.item(g.clamp(g.scalar(3.0), -1.0, 1.0)) == 1.0);
  const int rows[] = {1, 1, 0};
  CHECK(g.value(g.gather_rows(x, rows)).row(2) == a.row(0));
  Tensor s = g.value(g.scatter_add_rows(x, std::span<const int>(rows, 2), 3));
  CHECK(s(1, 0) == 4.0);
  CHECK(s(2, 1) == 0.0);
}

TEST_CASE("masked softmax and entropy match direct formulas") {
  Graph g;
  Tensor l(1, 4);
  l << 0.3, -1.2, 2.0, 0.7;
  const std::vector<bool> mask{true, false, true, true};
  double z = std::exp(0.3) + std::exp(2.0) + std::exp(0.7);
  CHECK(g.item(g.masked_log_softmax_at(g.constant(l), mask, 2)) == doctest::Approx(2.0 - std::log(z)).epsilon(1e-14));
  double h = 0;
  for (double v : {0.3, 2.0, 0.7}) h -= std::exp(v) / z * (v - std::log(z));
  CHECK(g.item(g.masked_entropy(g.constant(l), mask)) == doctest::Approx(h).epsilon(1e-14));
  CHECK_THROWS(g.masked_log_softmax_at(g.constant(l), mask, 1));
  const double lp = g.item(g.gaussian_log_prob(g.scalar(1.0), 1.3, 0.2));
  CHECK(lp == doctest::Approx(-0.09 / 0.08 - std::log(0.2) - 0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("backward on hand-worked examples") {
  ParameterSet ps;
  Tensor w(1, 1);
  w << 3.0;
  ParamId id = ps.add("w", w);
  Gradients grads = ps.zeros_like();
  Graph g(&ps);
  Var x = g.param(id);
  // f = w^2 + 2w -> f' = 2w + 2 = 8
  g.backward(g.add(g.square(x), g.scale(x, 2.0)), grads);
  CHECK(grads[0](0, 0) == 8.0);
  // Second call accumulates.
  Graph g2(&ps);
  g2.backward(g2.sigmoid(g2.param(id)), grads);
  const double s = 1.0 / (1.0 + std::exp(-3.0));
  CHECK(grads[0](0, 0) == doctest::Approx(8.0 + s * (1 - s)).epsilon(1e-15));
}

TEST_CASE("clamp and minimum route gradients") {
  ParameterSet ps;
  Tensor a(1, 3), b(1, 3);
  a << -2.0, 0.5, 2.0;
  b << 0.0, 1.0, 1.0;
  ps.add("a", a);
  ps.add("b", b);
  Gradients grads = ps.zeros_like();
  Graph g(&ps);
  g.backward(g.sum(g.clamp(g.param(0), -1.0, 1.0)), grads);
  CHECK(grads[0] == (Tensor(1, 3) << 0, 1, 0).finished());
  grads = ps.zeros_like();
  Graph g2(&ps);
  g2.backward(g2.sum(g2.minimum(g2.param(0), g2.param(1))), grads);
  CHECK(grads[0] == (Tensor(1, 3) << 1, 1, 0).finished());
  CHECK(grads[1] == (Tensor(1, 3) << 0, 0, 1).finished());
}

TEST_CASE("finite differences for every op") {
  std::mt19937_64 rng(5);
  ParameterSet ps;
  ParamId a = ps.add("a", random_tensor(3, 4, rng));
  ParamId b = ps.add("b", random_tensor(4, 2, rng));
  ParamId c = ps.add("c", random_tensor(1, 2, rng));
  ParamId d = ps.add("d", random_tensor(3, 2, rng));
  const int rows[] = {2, 0, 2, 1};
  const double w[] = {0.5, -1.0, 2.0};
  const std::vector<bool> mask{true, true, false, true, true, true};

  check_gradients(ps, [&](Graph& g) {
    Var h = g.add_bias(g.matmul(g.param(a), g.param(b)), g.param(c));  // 3 x 2
    Var k = g.mul(g.shifted_softplus(h), g.sigmoid(g.param(d)));
    k = g.add(k, g.mul_rows(g.exp(g.scale(g.param(d), 0.3)), w));
    k = g.sub(k, g.square(g.log_sigmoid(h)));
    Var gathered = g.gather_rows(k, rows);                      // 4 x 2
    Var back = g.scatter_add_rows(gathered, rows, 3);           // 3 x 2
    Var parts[] = {back, g.relu(g.add_scalar(h, 0.1))};
    Var wide = g.concat_cols(parts);                            // 3 x 4
    Var pooled = g.sum_rows(wide);                              // 1 x 4
    Var rep = g.repeat_rows(pooled, 2);
    return g.add(g.mean(rep), g.sum(g.minimum(h, g.param(d))));
  });

  check_gradients(ps, [&](Graph& g) {
    Var flat = g.concat_cols(std::vector<Var>{g.sum_rows(g.param(a)), g.param(c)});  // 1 x 6
    Var lp = g.masked_log_softmax_at(flat, mask, 4);
    Var ent = g.masked_entropy(flat, mask);
    Var mu = g.sum(g.param(c));
    Var gl = g.gaussian_log_prob(mu, 0.3, 0.2);
    return g.add(g.add(lp, g.scale(ent, 0.7)), g.scale(gl, 0.1));
  });
}

TEST_CASE("orthogonal init and linear layers") {
  std::mt19937_64 rng(3);
  Tensor t(8, 5);
  orthogonal_init(t, rng, 2.0);
  Tensor gram = t.transpose() * t;
  CHECK(gram.isApprox(4.0 * Tensor::Identity(5, 5), 1e-12));
  Tensor u(5, 8);
  orthogonal_init(u, rng);
  CHECK((u * u.transpose()).isApprox(Tensor::Identity(5, 5), 1e-12));

  ParameterSet ps;
  Mlp mlp = make_mlp(ps, "m", 4, 16, 2, 3, rng);
  CHECK(mlp.layers.size() == 3);
  CHECK(ps.size() == 6);
  for (ParamId p = 0; p < ps.size(); ++p) {
    if (ps.name(p).find("bias") != std::string::npos) CHECK(ps.value(p).isZero());
  }
  // Zero weights: the MLP returns its (zero) output bias.
  for (ParamId p = 0; p < ps.size(); ++p) ps.value(p).setZero();
  Graph g(&ps, false);
  Var y = apply(g, mlp, g.constant(random_tensor(2, 4, rng)));
  CHECK(g.value(y).isZero());

  // Identity weights pass a non-negative input through unchanged.
  ParameterSet id_ps;
  Mlp square = make_mlp(id_ps, "s", 3, 3, 2, 3, rng);
  for (ParamId p = 0; p < id_ps.size(); ++p) {
    auto& v = id_ps.value(p);
    if (v.rows() == 3) v = Tensor::Identity(3, 3); else v.setZero();
  }
  Tensor in(1, 3);
  in << 0.2, 1.5, 3.0;
  Graph g2(&id_ps, false);
  CHECK(g2.value(apply(g2, square, g2.constant(in))) == in);
}

TEST_CASE("global norm clipping") {
  Gradients g{(Tensor(1, 2) << 3, 0).finished(), (Tensor(1, 1) << 4).finished()};
  CHECK(global_norm(g) == 5.0);
  CHECK(clip_global_norm(g, 0.5) == 5.0);
  CHECK(global_norm(g) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g[0](0, 0) == doctest::Approx(0.3));
  Gradients small{(Tensor(1, 1) << 0.1).finished()};
  clip_global_norm(small, 0.5);
  CHECK(small[0](0, 0) == 0.1);
}

TEST_CASE("embedder is invariant to rigid motion and equivariant to permutation") {
  std::mt19937_64 rng(8);
  ParameterSet ps;
  EmbedderConfig cfg{8, 2, 12, 10, 5.0};
  Embedder emb(ps, "e", cfg, rng);
  auto lib = testing::bundled_fragments();
  for (int trial = 0; trial < 10; ++trial) {
    const auto& cloud = lib[rng() % lib.size()];
    Graph g(&ps, false);
    Tensor base = g.value(emb.apply(g, cloud));
    CHECK(base.rows() == static_cast<Eigen::Index>(cloud.size()));
    CHECK(base.cols() == 8);

    auto moved = geometry::rigid_transform_apply(testing::random_rigid(rng), cloud);
    Tensor m = g.value(emb.apply(g, moved));
    CHECK((m - base).cwiseAbs().maxCoeff() < 1e-9);

    std::vector<std::size_t> perm(cloud.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    chem::AtomCloud shuffled;
    for (std::size_t k : perm) shuffled.add(cloud.element(k), cloud.position(k));
    Tensor p = g.value(emb.apply(g, shuffled));
    for (std::size_t k = 0; k < perm.size(); ++k) {
      CHECK((p.row(k) - base.row(perm[k])).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  // A lone atom has no neighbours and still embeds.
  chem::AtomCloud one;
  one.add(chem::Element::O, chem::Vec3::Zero());
  Graph g(&ps, false);
  CHECK(g.value(emb.apply(g, one)).allFinite());
}

TEST_CASE("embedder gradients") {
  std::mt19937_64 rng(4);
  ParameterSet ps;
  Embedder emb(ps, "e", EmbedderConfig{4, 2, 5, 6, 5.0}, rng);
  auto water = chem::read_xyz_file(testing::data_dir() / "fragments" / "water.xyz");
  check_gradients(ps, [&](Graph& g) { return g.sum(g.square(emb.apply(g, water))); }, 1e-5);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  std::mt19937_64 rng(2);
  Checkpoint c;
  c.metadata["alpha"] = "1";
  c.metadata["with space"] = "a\nb";
  c.params.add("w", random_tensor(3, 7, rng));
  c.params.add("b", random_tensor(1, 7, rng));
  c.params.add("empty", Tensor(0, 0));
  const std::string bytes = serialize_checkpoint(c);
  CHECK(bytes.substr(0, 8) == "FFCKPT01");
  Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(back.metadata == c.metadata);
  CHECK(back.params == c.params);
  for (ParamId p = 0; p < c.params.size(); ++p) {
    CHECK(std::memcmp(back.params.value(p).data(), c.params.value(p).data(),
                      sizeof(double) * c.params.value(p).size()) == 0);
  }
  CHECK(serialize_checkpoint(back) == bytes);

  auto path = std::filesystem::temp_directory_path() / "ff_test_nn.ckpt";
  save_checkpoint(path, c);
  CHECK(load_checkpoint(path).params == c.params);
  std::filesystem::remove(path);
}

TEST_CASE("malformed checkpoints are rejected") {
  Checkpoint c;
  c.params.add("w", Tensor::Ones(2, 2));
  std::string bytes = serialize_checkpoint(c);
  std::string bad_version = bytes;
  bad_version[8] = 9;
  CHECK_THROWS_AS(deserialize_checkpoint(bad_version), CheckpointError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad_magic), CheckpointError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), CheckpointError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x"), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.ckpt"), CheckpointError);
}
