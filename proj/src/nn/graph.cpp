#include "fragforge/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fragforge/error.hpp"

namespace fragforge::nn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(std::string("graph: ") + what);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct MaskedSoftmax {
  Eigen::VectorXd p;  // zero on masked entries
  double lse = 0.0;
};

MaskedSoftmax masked_softmax(const Tensor& logits, const std::vector<bool>& mask) {
  const Eigen::Index n = logits.size();
  require(static_cast<std::size_t>(n) == mask.size(), "mask length does not match logits");
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask[static_cast<std::size_t>(i)]) mx = std::max(mx, logits.data()[i]);
  }
  if (!std::isfinite(mx)) throw Error("masked softmax: every entry is masked");
  MaskedSoftmax out;
  out.p = Eigen::VectorXd::Zero(n);
  double z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    out.p[i] = std::exp(logits.data()[i] - mx);
    z += out.p[i];
  }
  out.p /= z;
  out.lse = mx + std::log(z);
  return out;
}

}  // namespace

Var Graph::push(Tensor value, std::initializer_list<int> inputs,
                std::function<void(Graph&, const Tensor&)> back) {
  return push_many(std::move(value), std::vector<int>(inputs), std::move(back));
}

Var Graph::push_many(Tensor value, const std::vector<int>& inputs,
                     std::function<void(Graph&, const Tensor&)> back) {
  Node n;
  n.value = std::move(value);
  for (int i : inputs) n.requires_grad = n.requires_grad || needs(i);
  if (record_ && n.requires_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Graph::param(ParamId id) {
  require(params_ != nullptr && id < params_->size(), "unknown parameter");
  if (param_nodes_.size() < params_->size()) param_nodes_.resize(params_->size(), -1);
  if (param_nodes_[id] >= 0) return Var{param_nodes_[id]};
  Node n;
  n.ref = &params_->value(id);
  n.requires_grad = record_;
  n.param = static_cast<long>(id);
  nodes_.push_back(std::move(n));
  param_nodes_[id] = static_cast<int>(nodes_.size() - 1);
  return Var{param_nodes_[id]};
}

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Graph::scalar(double v) { return constant(Tensor::Constant(1, 1, v)); }

const Tensor& Graph::value(Var v) const {
  require(v.id >= 0 && static_cast<std::size_t>(v.id) < nodes_.size(), "invalid variable");
  return val(v.id);
}

double Graph::item(Var v) const {
  const Tensor& t = value(v);
  require(t.size() == 1, "item() on a non-scalar");
  return t(0, 0);
}

Var Graph::matmul(Var a, Var b) {
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  require(A.cols() == B.rows(), "matmul shape mismatch");
  Tensor out = A * B;
  return push(std::move(out), {a.id, b.id}, [a, b](Graph& g, const Tensor& G) {
    if (g.needs(a.id)) g.accumulate(a.id, G * g.val(b.id).transpose());
    if (g.needs(b.id)) g.accumulate(b.id, g.val(a.id).transpose() * G);
  });
}

Var Graph::add(Var a, Var b) {
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  require(A.rows() == B.rows() && A.cols() == B.cols(), "add shape mismatch");
  return push(A + B, {a.id, b.id}, [a, b](Graph& g, const Tensor& G) {
    g.accumulate(a.id, G);
    g.accumulate(b.id, G);
  });
}

Var Graph::sub(Var a, Var b) {
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  require(A.rows() == B.rows() && A.cols() == B.cols(), "sub shape mismatch");
  return push(A - B, {a.id, b.id}, [a, b](Graph& g, const Tensor& G) {
    g.accumulate(a.id, G);
    g.accumulate(b.id, -G);
  });
}

Var Graph::mul(Var a, Var b) {
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  require(A.rows() == B.rows() && A.cols() == B.cols(), "mul shape mismatch");
  return push(A.cwiseProduct(B), {a.id, b.id}, [a, b](Graph& g, const Tensor& G) {
    if (g.needs(a.id)) g.accumulate(a.id, G.cwiseProduct(g.val(b.id)));
    if (g.needs(b.id)) g.accumulate(b.id, G.cwiseProduct(g.val(a.id)));
  });
}

Var Graph::add_bias(Var a, Var bias) {
  const Tensor& A = val(a.id);
  const Tensor& B = val(bias.id);
  require(B.rows() == 1 && B.cols() == A.cols(), "bias shape mismatch");
  Tensor out = A.rowwise() + B.row(0);
  return push(std::move(out), {a.id, bias.id}, [a, bias](Graph& g, const Tensor& G) {
    g.accumulate(a.id, G);
    if (g.needs(bias.id)) g.accumulate(bias.id, G.colwise().sum());
  });
}

Var Graph::scale(Var a, double c) {
  return push(c * val(a.id), {a.id}, [a, c](Graph& g, const Tensor& G) { g.accumulate(a.id, c * G); });
}

Var Graph::add_scalar(Var a, double c) {
  Tensor out = val(a.id).array() + c;
  return push(std::move(out), {a.id}, [a](Graph& g, const Tensor& G) { g.accumulate(a.id, G); });
}

Var Graph::mul_rows(Var a, std::span<const double> w) {
  const Tensor& A = val(a.id);
  require(static_cast<std::size_t>(A.rows()) == w.size(), "mul_rows length mismatch");
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  Tensor out = wv.asDiagonal() * A;
  Eigen::VectorXd weights = wv;
  return push(std::move(out), {a.id}, [a, weights](Graph& g, const Tensor& G) {
    g.accumulate(a.id, weights.asDiagonal() * G);
  });
}

Var Graph::relu(Var a) {
  Tensor out = val(a.id).cwiseMax(0.0);
  return push(std::move(out), {a.id}, [a](Graph& g, const Tensor& G) {
    const Tensor& x = g.val(a.id);
    g.accumulate(a.id, (x.array() > 0.0).select(G, 0.0));
  });
}

Var Graph::shifted_softplus(Var a) {
  Tensor out = val(a.id).unaryExpr([](double x) { return softplus(x) - std::numbers::ln2; });
  return push(std::move(out), {a.id}, [a](Graph& g, const Tensor& G) {
    g.accumulate(a.id, G.cwiseProduct(g.val(a.id).unaryExpr(&sigmoid_scalar)));
  });
}

Var Graph::sigmoid(Var a) {
  Tensor out = val(a.id).unaryExpr(&sigmoid_scalar);
  Tensor s = out;
  return push(std::move(out), {a.id}, [a, s](Graph& g, const Tensor& G) {
    g.accumulate(a.id, G.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix())));
  });
}

Var Graph::log_sigmoid(Var a) {
  Tensor out = val(a.id).unaryExpr([](double x) { return -softplus(-x); });
  return push(std::move(out), {a.id}, [a](Graph& g, const Tensor& G) {
    g.accumulate(a.id, G.cwiseProduct(g.val(a.id).unaryExpr([](double x) { return sigmoid_scalar(-x); })));
  });
}

Var Graph::exp(Var a) {
  Tensor out = val(a.id).array().exp();
  Tensor e = out;
  return push(std::move(out), {a.id}, [a, e](Graph& g, const Tensor& G) {
    g.accumulate(a.id, G.cwiseProduct(e));
  });
}

Var Graph::square(Var a) {
  Tensor out = val(a.id).array().square();
  return push(std::move(out), {a.id}, [a](Graph& g, const Tensor& G) {
    g.accumulate(a.id, 2.0 * G.cwiseProduct(g.val(a.id)));
  });
}

Var Graph::clamp(Var a, double lo, double hi) {
  require(lo <= hi, "clamp bounds reversed");
  Tensor out = val(a.id).cwiseMax(lo).cwiseMin(hi);
  return push(std::move(out), {a.id}, [a, lo, hi](Graph& g, const Tensor& G) {
    const Tensor& x = g.val(a.id);
    g.accumulate(a.id, (x.array() >= lo && x.array() <= hi).select(G, 0.0));
  });
}

Var Graph::minimum(Var a, Var b) {
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  require(A.rows() == B.rows() && A.cols() == B.cols(), "minimum shape mismatch");
  Tensor out = A.cwiseMin(B);
  return push(std::move(out), {a.id, b.id}, [a, b](Graph& g, const Tensor& G) {
    auto pick_a = (g.val(a.id).array() <= g.val(b.id).array());
    if (g.needs(a.id)) g.accumulate(a.id, pick_a.select(G, 0.0));
    if (g.needs(b.id)) g.accumulate(b.id, pick_a.select(0.0, G));
  });
}

Var Graph::gather_rows(Var a, std::span<const int> rows) {
  const Tensor& A = val(a.id);
  Tensor out(static_cast<Eigen::Index>(rows.size()), A.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(rows[k] >= 0 && rows[k] < A.rows(), "gather index out of range");
    out.row(static_cast<Eigen::Index>(k)) = A.row(rows[k]);
  }
  std::vector<int> idx(rows.begin(), rows.end());
  const Eigen::Index n = A.rows();
  return push(std::move(out), {a.id}, [a, idx, n](Graph& g, const Tensor& G) {
    Tensor ga = Tensor::Zero(n, G.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) ga.row(idx[k]) += G.row(static_cast<Eigen::Index>(k));
    g.accumulate(a.id, ga);
  });
}

Var Graph::scatter_add_rows(Var a, std::span<const int> rows, int n_out) {
  const Tensor& A = val(a.id);
  require(static_cast<std::size_t>(A.rows()) == rows.size(), "scatter length mismatch");
  Tensor out = Tensor::Zero(n_out, A.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(rows[k] >= 0 && rows[k] < n_out, "scatter index out of range");
    out.row(rows[k]) += A.row(static_cast<Eigen::Index>(k));
  }
  std::vector<int> idx(rows.begin(), rows.end());
  return push(std::move(out), {a.id}, [a, idx](Graph& g, const Tensor& G) {
    Tensor ga(static_cast<Eigen::Index>(idx.size()), G.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) ga.row(static_cast<Eigen::Index>(k)) = G.row(idx[k]);
    g.accumulate(a.id, ga);
  });
}

Var Graph::concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat of nothing");
  const Eigen::Index rows = val(parts[0].id).rows();
  Eigen::Index cols = 0;
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  for (Var p : parts) {
    require(val(p.id).rows() == rows, "concat row mismatch");
    cols += val(p.id).cols();
    ids.push_back(p.id);
    widths.push_back(val(p.id).cols());
  }
  Tensor out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, val(p.id).cols()) = val(p.id);
    c += val(p.id).cols();
  }
  return push_many(std::move(out), ids, [ids, widths](Graph& g, const Tensor& G) {
    Eigen::Index c0 = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (g.needs(ids[k])) g.accumulate(ids[k], G.middleCols(c0, widths[k]));
      c0 += widths[k];
    }
  });
}

Var Graph::repeat_rows(Var row, int n) {
  const Tensor& R = val(row.id);
  require(R.rows() == 1, "repeat_rows expects a single row");
  Tensor out = R.replicate(n, 1);
  return push(std::move(out), {row.id}, [row](Graph& g, const Tensor& G) {
    g.accumulate(row.id, G.colwise().sum());
  });
}

Var Graph::sum_rows(Var a) {
  const Tensor& A = val(a.id);
  Tensor out = A.rows() == 0 ? Tensor(Tensor::Zero(1, A.cols())) : Tensor(A.colwise().sum());
  const Eigen::Index n = A.rows();
  return push(std::move(out), {a.id}, [a, n](Graph& g, const Tensor& G) {
    g.accumulate(a.id, G.replicate(n, 1));
  });
}

Var Graph::sum(Var a) {
  const Tensor& A = val(a.id);
  const Eigen::Index r = A.rows();
  const Eigen::Index c = A.cols();
  return push(Tensor::Constant(1, 1, A.sum()), {a.id}, [a, r, c](Graph& g, const Tensor& G) {
    g.accumulate(a.id, Tensor::Constant(r, c, G(0, 0)));
  });
}

Var Graph::mean(Var a) {
  const Tensor& A = val(a.id);
  require(A.size() > 0, "mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(A.size()));
}

Var Graph::masked_log_softmax_at(Var logits, const std::vector<bool>& mask, std::size_t index) {
  const Tensor& z = val(logits.id);
  require(index < mask.size() && mask[index], "log-prob requested for a masked entry");
  auto sm = masked_softmax(z, mask);
  const double v = z.data()[index] - sm.lse;
  const Eigen::Index r = z.rows();
  const Eigen::Index c = z.cols();
  Eigen::VectorXd p = std::move(sm.p);
  return push(Tensor::Constant(1, 1, v), {logits.id},
              [logits, p, index, r, c](Graph& g, const Tensor& G) {
                Tensor gz(r, c);
                Eigen::Map<Eigen::VectorXd> flat(gz.data(), gz.size());
                flat = -G(0, 0) * p;
                flat[static_cast<Eigen::Index>(index)] += G(0, 0);
                g.accumulate(logits.id, gz);
              });
}

Var Graph::masked_entropy(Var logits, const std::vector<bool>& mask) {
  const Tensor& z = val(logits.id);
  auto sm = masked_softmax(z, mask);
  Eigen::VectorXd logp = Eigen::VectorXd::Zero(sm.p.size());
  double h = 0.0;
  for (Eigen::Index i = 0; i < sm.p.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    logp[i] = z.data()[i] - sm.lse;
    h -= sm.p[i] * logp[i];
  }
  const Eigen::Index r = z.rows();
  const Eigen::Index c = z.cols();
  Eigen::VectorXd p = std::move(sm.p);
  return push(Tensor::Constant(1, 1, h), {logits.id},
              [logits, p, logp, h, r, c](Graph& g, const Tensor& G) {
                Tensor gz(r, c);
                Eigen::Map<Eigen::VectorXd> flat(gz.data(), gz.size());
                flat = -G(0, 0) * p.cwiseProduct((logp.array() + h).matrix());
                g.accumulate(logits.id, gz);
              });
}

Var Graph::gaussian_log_prob(Var mean, double x, double sigma) {
  const Tensor& m = val(mean.id);
  require(m.size() == 1, "gaussian mean must be a scalar");
  require(sigma > 0.0, "gaussian sigma must be positive");
  const double z = (x - m(0, 0)) / sigma;
  const double v = -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
  return push(Tensor::Constant(1, 1, v), {mean.id}, [mean, x, sigma](Graph& g, const Tensor& G) {
    const double mu = g.val(mean.id)(0, 0);
    g.accumulate(mean.id, Tensor::Constant(1, 1, G(0, 0) * (x - mu) / (sigma * sigma)));
  });
}

void Graph::backward(Var loss, Gradients& grads) {
  require(record_, "backward on a graph built without recording");
  require(value(loss).size() == 1, "backward needs a scalar loss");
  if (params_ != nullptr) require(grads.size() == params_->size(), "gradient buffer size mismatch");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  Node& root = nodes_[static_cast<std::size_t>(loss.id)];
  if (!root.requires_grad) return;
  root.grad = Tensor::Ones(1, 1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0) continue;
    if (n.back) n.back(*this, n.grad);
    if (n.param >= 0) grads[static_cast<std::size_t>(n.param)] += n.grad;
    n.grad.resize(0, 0);
  }
}

}  // namespace fragforge::nn
