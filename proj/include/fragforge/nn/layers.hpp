#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fragforge/chem/atom_cloud.hpp"
#include "fragforge/nn/graph.hpp"
#include "fragforge/nn/parameters.hpp"

namespace fragforge::nn {

struct Linear {
  ParamId weight = 0;  // in x out
  ParamId bias = 0;    // 1 x out
  bool has_bias = true;
  int in = 0;
  int out = 0;
};

// Orthogonal weights scaled by `gain`, zero bias.
Linear make_linear(ParameterSet& params, const std::string& name, int in, int out,
                   std::mt19937_64& rng, double gain = 1.0, bool bias = true);
Var apply(Graph& g, const Linear& layer, Var x);

// Affine layers with ReLU between them. Hidden layers use gain sqrt(2); the
// last layer uses `out_gain`.
struct Mlp {
  std::vector<Linear> layers;
  int in() const { return layers.front().in; }
  int out() const { return layers.back().out; }
};

Mlp make_mlp(ParameterSet& params, const std::string& name, int in, int hidden, int n_hidden,
             int out, std::mt19937_64& rng, double out_gain = 1.0);
Var apply(Graph& g, const Mlp& mlp, Var x);

// Maps an unbounded head output into [lo, hi] through a sigmoid.
Var rescale_sigmoid(Graph& g, Var x, double lo, double hi);

// Gaussian radial basis: exp(-gamma (d - mu_k)^2), mu_k evenly spaced on
// [0, cutoff], gamma = 1 / (2 dmu^2).
Eigen::VectorXd rbf_expand(double d, int n_basis, double cutoff);

// 0.5 (cos(pi d / cutoff) + 1) inside the cutoff, 0 outside.
double cosine_cutoff(double d, double cutoff);

struct EmbedderConfig {
  int features = 64;
  int interactions = 3;
  int filters = 128;
  int n_basis = 64;
  double cutoff = 5.0;

  bool operator==(const EmbedderConfig&) const = default;
};

// Continuous-filter convolution network over a point cloud. Atom features
// start from a learned per-element embedding and are refined by residual
// interaction blocks whose filters are generated from interatomic distances.
class Embedder {
 public:
  Embedder() = default;
  Embedder(ParameterSet& params, const std::string& name, const EmbedderConfig& config,
           std::mt19937_64& rng);

  const EmbedderConfig& config() const { return config_; }
  // Returns n_atoms x features.
  Var apply(Graph& g, const chem::AtomCloud& cloud) const;

 private:
  struct Interaction {
    Linear in2f;     // features -> filters, no bias
    Linear filter1;  // basis -> filters
    Linear filter2;  // filters -> filters
    Linear f2out;    // filters -> features
    Linear dense;    // features -> features
  };

  EmbedderConfig config_;
  ParamId embedding_ = 0;  // 6 x features
  std::vector<Interaction> blocks_;
};

}  // namespace fragforge::nn
