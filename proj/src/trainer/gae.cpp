#include "fragforge/trainer/gae.hpp"

#include "fragforge/error.hpp"

namespace fragforge::trainer {

GaeResult gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                         const std::vector<bool>& dones, double gamma, double lambda, double bootstrap_value) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw Error("gae: rewards, values and dones differ in length");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.targets.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[k] = next_adv;
    out.targets[k] = next_adv + values[k];
    next_value = values[k];
  }
  return out;
}

}  // namespace fragforge::trainer
