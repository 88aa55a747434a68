#include "fragforge/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "fragforge/chem/element.hpp"
#include "fragforge/error.hpp"

namespace fragforge::nn {

Linear make_linear(ParameterSet& params, const std::string& name, int in, int out,
                   std::mt19937_64& rng, double gain, bool bias) {
  if (in <= 0 || out <= 0) throw Error("linear layer '" + name + "' needs positive sizes");
  Linear l;
  l.in = in;
  l.out = out;
  l.has_bias = bias;
  Tensor w(in, out);
  orthogonal_init(w, rng, gain);
  l.weight = params.add(name + ".weight", std::move(w));
  if (bias) l.bias = params.add(name + ".bias", Tensor::Zero(1, out));
  return l;
}

Var apply(Graph& g, const Linear& layer, Var x) {
  if (g.value(x).cols() != layer.in) {
    throw Error("linear layer expects " + std::to_string(layer.in) + " inputs, got " +
                std::to_string(g.value(x).cols()));
  }
  Var y = g.matmul(x, g.param(layer.weight));
  return layer.has_bias ? g.add_bias(y, g.param(layer.bias)) : y;
}

Mlp make_mlp(ParameterSet& params, const std::string& name, int in, int hidden, int n_hidden,
             int out, std::mt19937_64& rng, double out_gain) {
  Mlp m;
  int width = in;
  for (int i = 0; i < n_hidden; ++i) {
    m.layers.push_back(make_linear(params, name + "." + std::to_string(i), width, hidden, rng,
                                   std::numbers::sqrt2));
    width = hidden;
  }
  m.layers.push_back(make_linear(params, name + "." + std::to_string(n_hidden), width, out, rng, out_gain));
  return m;
}

Var apply(Graph& g, const Mlp& mlp, Var x) {
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    x = apply(g, mlp.layers[i], x);
    if (i + 1 < mlp.layers.size()) x = g.relu(x);
  }
  return x;
}

Var rescale_sigmoid(Graph& g, Var x, double lo, double hi) {
  return g.add_scalar(g.scale(g.sigmoid(x), hi - lo), lo);
}

Eigen::VectorXd rbf_expand(double d, int n_basis, double cutoff) {
  if (n_basis < 2 || cutoff <= 0) throw Error("rbf_expand needs n_basis >= 2 and a positive cutoff");
  const double step = cutoff / (n_basis - 1);
  const double gamma = 1.0 / (2.0 * step * step);
  Eigen::VectorXd e(n_basis);
  for (int k = 0; k < n_basis; ++k) {
    const double diff = d - k * step;
    e[k] = std::exp(-gamma * diff * diff);
  }
  return e;
}

double cosine_cutoff(double d, double cutoff) {
  if (d >= cutoff) return 0.0;
  return 0.5 * (std::cos(std::numbers::pi * d / cutoff) + 1.0);
}

Embedder::Embedder(ParameterSet& params, const std::string& name, const EmbedderConfig& config,
                   std::mt19937_64& rng)
    : config_(config) {
  if (config.features <= 0 || config.filters <= 0 || config.interactions < 0 || config.n_basis < 2 ||
      config.cutoff <= 0) {
    throw Error("invalid embedder configuration");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor emb(static_cast<Eigen::Index>(chem::kAllElements.size()), config.features);
  for (Eigen::Index i = 0; i < emb.size(); ++i) emb.data()[i] = normal(rng);
  embedding_ = params.add(name + ".embedding", std::move(emb));
  for (int b = 0; b < config.interactions; ++b) {
    const std::string p = name + ".interaction" + std::to_string(b);
    Interaction blk;
    blk.in2f = make_linear(params, p + ".in2f", config.features, config.filters, rng, 1.0, false);
    blk.filter1 = make_linear(params, p + ".filter1", config.n_basis, config.filters, rng);
    blk.filter2 = make_linear(params, p + ".filter2", config.filters, config.filters, rng);
    blk.f2out = make_linear(params, p + ".f2out", config.filters, config.features, rng);
    blk.dense = make_linear(params, p + ".dense", config.features, config.features, rng);
    blocks_.push_back(blk);
  }
}

Var Embedder::apply(Graph& g, const chem::AtomCloud& cloud) const {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  if (n == 0) throw Error("cannot embed an empty cloud");

  Tensor onehot = Tensor::Zero(n, static_cast<Eigen::Index>(chem::kAllElements.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    onehot(i, static_cast<Eigen::Index>(chem::index_of(cloud.element(static_cast<std::size_t>(i))))) = 1.0;
  }
  Var h = g.matmul(g.constant(std::move(onehot)), g.param(embedding_));

  // Edges grouped by destination and ordered by distance, so each atom sums
  // its messages in an order that does not depend on atom numbering.
  std::vector<std::tuple<int, double, int>> edges;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = (cloud.position(static_cast<std::size_t>(i)) -
                        cloud.position(static_cast<std::size_t>(j))).norm();
      if (d < config_.cutoff) edges.emplace_back(static_cast<int>(i), d, static_cast<int>(j));
    }
  }
  std::sort(edges.begin(), edges.end());

  const auto n_edges = static_cast<Eigen::Index>(edges.size());
  std::vector<int> dst(edges.size());
  std::vector<int> src(edges.size());
  std::vector<double> fcut(edges.size());
  Tensor basis(n_edges, config_.n_basis);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, d, j] = edges[e];
    dst[e] = i;
    src[e] = j;
    fcut[e] = cosine_cutoff(d, config_.cutoff);
    basis.row(static_cast<Eigen::Index>(e)) = rbf_expand(d, config_.n_basis, config_.cutoff).transpose();
  }
  Var rbf = g.constant(std::move(basis));

  for (const Interaction& blk : blocks_) {
    Var agg;
    if (n_edges == 0) {
      agg = g.constant(Tensor::Zero(n, config_.filters));
    } else {
      Var w = nn::apply(g, blk.filter2, g.shifted_softplus(nn::apply(g, blk.filter1, rbf)));
      w = g.mul_rows(w, fcut);
      Var x = g.gather_rows(nn::apply(g, blk.in2f, h), src);
      agg = g.scatter_add_rows(g.mul(x, w), dst, static_cast<int>(n));
    }
    Var v = nn::apply(g, blk.dense, g.shifted_softplus(nn::apply(g, blk.f2out, agg)));
    h = g.add(h, v);
  }
  return h;
}

}  // namespace fragforge::nn
