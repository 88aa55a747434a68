#include "fragforge/trainer/ppo.hpp"

#include <cmath>
#include <thread>

#include "fragforge/error.hpp"
#include "fragforge/policy/policy.hpp"

namespace fragforge::trainer {

void PPOConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid PPO config: ") + what);
  };
  need(clip_epsilon > 0, "clip_epsilon must be positive");
  need(max_grad_norm > 0, "max_grad_norm must be positive");
  need(gae_lambda >= 0 && gae_lambda <= 1, "gae_lambda must lie in [0, 1]");
  need(gamma >= 0 && gamma <= 1, "gamma must lie in [0, 1]");
  need(value_coef >= 0 && entropy_coef >= 0, "loss coefficients must be non-negative");
  need(epochs >= 1, "epochs must be at least 1");
  need(learning_rate > 0, "learning_rate must be positive");
  need(minibatch_size >= 1, "minibatch_size must be at least 1");
  need(workers >= 1, "workers must be at least 1");
  need(total_steps >= 0, "total_steps must be non-negative");
  need(eval_interval >= 1 && eval_start >= 0, "bad evaluation schedule");
  need(segment_steps >= 1, "segment_steps must be at least 1");
  need(grad_chunks >= 1, "grad_chunks must be at least 1");
}

nn::Var clipped_surrogate(nn::Graph& g, nn::Var ratio, double advantage, double epsilon) {
  nn::Var unclipped = g.scale(ratio, advantage);
  nn::Var clipped = g.scale(g.clamp(ratio, 1.0 - epsilon, 1.0 + epsilon), advantage);
  return g.minimum(unclipped, clipped);
}

nn::Var ppo_sample_loss(nn::Graph& g, const policy::PolicyModel& model, const Transition& t,
                        const PPOConfig& cfg, LossParts& parts, double bond_factor) {
  auto trace = policy::trace_policy(g, model, t.state, &t.action, nullptr, true, bond_factor);
  nn::Var ratio = g.exp(g.add_scalar(trace.log_prob, -t.log_prob));
  nn::Var surr = clipped_surrogate(g, ratio, t.advantage, cfg.clip_epsilon);
  nn::Var vloss = g.square(g.add_scalar(trace.value, -t.target));
  nn::Var loss = g.sub(g.add(g.scale(surr, -1.0), g.scale(vloss, cfg.value_coef)),
                       g.scale(trace.entropy, cfg.entropy_coef));
  const double r = g.item(ratio);
  parts.policy = -g.item(surr);
  parts.value = g.item(vloss);
  parts.entropy = g.item(trace.entropy);
  parts.total = g.item(loss);
  parts.clip_fraction = std::abs(r - 1.0) > cfg.clip_epsilon ? 1.0 : 0.0;
  parts.approx_kl = t.log_prob - (g.item(trace.log_prob));
  return loss;
}

LossParts ppo_objective(const policy::PolicyModel& model, std::span<const Transition* const> batch,
                        const PPOConfig& cfg, nn::Gradients* grads, double bond_factor) {
  LossParts mean;
  if (batch.empty()) return mean;
  const double w = 1.0 / static_cast<double>(batch.size());
  const std::size_t n_chunks = std::min<std::size_t>(static_cast<std::size_t>(cfg.grad_chunks), batch.size());

  struct Chunk {
    LossParts sum;
    nn::Gradients grads;
    std::exception_ptr error;
  };
  std::vector<Chunk> chunks(n_chunks);
  auto run = [&](std::size_t c) {
    Chunk& ch = chunks[c];
    try {
      if (grads != nullptr) ch.grads = model.params().zeros_like();
      const std::size_t lo = batch.size() * c / n_chunks;
      const std::size_t hi = batch.size() * (c + 1) / n_chunks;
      for (std::size_t i = lo; i < hi; ++i) {
        nn::Graph g(&model.params(), grads != nullptr);
        LossParts p;
        nn::Var loss = ppo_sample_loss(g, model, *batch[i], cfg, p, bond_factor);
        if (!std::isfinite(p.total)) {
          throw Error("non-finite PPO loss (policy " + std::to_string(p.policy) + ", value " +
                      std::to_string(p.value) + ", entropy " + std::to_string(p.entropy) + ")");
        }
        if (grads != nullptr) g.backward(g.scale(loss, w), ch.grads);
        ch.sum.total += p.total;
        ch.sum.policy += p.policy;
        ch.sum.value += p.value;
        ch.sum.entropy += p.entropy;
        ch.sum.clip_fraction += p.clip_fraction;
        ch.sum.approx_kl += p.approx_kl;
      }
    } catch (...) {
      ch.error = std::current_exception();
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(n_chunks, std::max(1u, std::thread::hardware_concurrency()));
  if (n_threads <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run(c);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t c = t; c < n_chunks; c += n_threads) run(c);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (auto& ch : chunks) {
    if (ch.error) std::rethrow_exception(ch.error);
    mean.total += ch.sum.total * w;
    mean.policy += ch.sum.policy * w;
    mean.value += ch.sum.value * w;
    mean.entropy += ch.sum.entropy * w;
    mean.clip_fraction += ch.sum.clip_fraction * w;
    mean.approx_kl += ch.sum.approx_kl * w;
    if (grads != nullptr) nn::add_into(*grads, ch.grads);
  }
  return mean;
}

Adam::Adam(const nn::ParameterSet& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(params.zeros_like()), v_(params.zeros_like()) {}

void Adam::step(nn::ParameterSet& params, const nn::Gradients& grads) {
  if (grads.size() != params.size() || m_.size() != params.size()) throw Error("Adam: parameter layout changed");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
    params.value(i).array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

}  // namespace fragforge::trainer
