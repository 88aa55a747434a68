#pragma once

#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "fragforge/nn/parameters.hpp"
#include "fragforge/nn/tensor.hpp"

namespace fragforge::nn {

// Handle to a node in a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Eager reverse-mode tape. Values are computed as ops are recorded; backward()
// walks the tape once and accumulates parameter gradients. A graph reads
// parameters from a ParameterSet that must outlive it and stay unchanged. With
// `record` false no backward closures are kept (inference only).
class Graph {
 public:
  explicit Graph(const ParameterSet* params = nullptr, bool record = true)
      : params_(params), record_(record) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var param(ParamId id);
  Var constant(Tensor value);
  Var scalar(double v);

  const Tensor& value(Var v) const;
  double item(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Linear algebra.
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);                  // elementwise
  Var add_bias(Var a, Var bias);          // a (n x k) + bias (1 x k) on every row
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  Var mul_rows(Var a, std::span<const double> w);  // row i scaled by constant w[i]

  // Elementwise nonlinearities.
  Var relu(Var a);
  Var shifted_softplus(Var a);  // log(0.5 e^x + 0.5)
  Var sigmoid(Var a);
  Var log_sigmoid(Var a);
  Var exp(Var a);
  Var square(Var a);
  Var clamp(Var a, double lo, double hi);  // zero gradient outside [lo, hi]
  Var minimum(Var a, Var b);               // gradient flows to the selected operand

  // Shape and indexing.
  Var gather_rows(Var a, std::span<const int> rows);
  Var scatter_add_rows(Var a, std::span<const int> rows, int n_out);
  Var concat_cols(std::span<const Var> parts);
  Var repeat_rows(Var row, int n);
  Var sum_rows(Var a);  // 1 x k
  Var sum(Var a);       // 1 x 1
  Var mean(Var a);      // 1 x 1

  // Distributions over a logit vector (n x 1 or 1 x n); masked entries are
  // excluded. Both return 1 x 1.
  Var masked_log_softmax_at(Var logits, const std::vector<bool>& mask, std::size_t index);
  Var masked_entropy(Var logits, const std::vector<bool>& mask);
  // log N(x; mean, sigma^2) for a 1 x 1 mean.
  Var gaussian_log_prob(Var mean, double x, double sigma);

  // Requires a 1 x 1 loss. Adds d loss / d param into `grads` (which must
  // have one tensor per parameter). Parameters the loss does not reach get
  // nothing added.
  void backward(Var loss, Gradients& grads);

 private:
  struct Node {
    Tensor value;
    const Tensor* ref = nullptr;
    Tensor grad;
    bool requires_grad = false;
    long param = -1;
    std::function<void(Graph&, const Tensor&)> back;
  };

  const Tensor& val(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.ref != nullptr ? *n.ref : n.value;
  }
  bool needs(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  Var push(Tensor value, std::initializer_list<int> inputs,
           std::function<void(Graph&, const Tensor&)> back);
  Var push_many(Tensor value, const std::vector<int>& inputs,
                std::function<void(Graph&, const Tensor&)> back);

  template <typename Expr>
  void accumulate(int id, const Expr& g) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  const ParameterSet* params_;
  bool record_;
  std::deque<Node> nodes_;
  std::vector<int> param_nodes_;  // param id -> node id (or -1)
};

}  // namespace fragforge::nn
