#include "fragforge/policy/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fragforge/error.hpp"

namespace fragforge::policy {

using nn::Graph;
using nn::Tensor;
using nn::Var;

std::vector<double> masked_probabilities(const Tensor& logits, const std::vector<bool>& mask) {
  const auto n = static_cast<std::size_t>(logits.size());
  if (n != mask.size()) throw Error("mask length does not match logits");
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) mx = std::max(mx, logits.data()[i]);
  }
  if (!std::isfinite(mx)) throw Error("every choice is masked");
  std::vector<double> p(n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    p[i] = std::exp(logits.data()[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

double sample_truncated_normal(std::mt19937_64& rng, double mean, double sigma, double lo, double hi) {
  std::normal_distribution<double> normal(mean, sigma);
  double x = mean;
  for (int i = 0; i < 100; ++i) {
    x = normal(rng);
    if (x >= lo && x <= hi) return x;
  }
  return std::clamp(x, lo, hi);
}

namespace {

std::size_t sample_categorical(std::mt19937_64& rng, const std::vector<double>& p) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

std::size_t argmax(const std::vector<double>& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

// Shared forward state for one policy evaluation.
struct Forward {
  Graph& g;
  const PolicyModel& m;
  const env::EnvState& s;
  Var h_mol;  // n x features
  Var h_F;    // 1 x multiset_features
  Tensor x_F;

  Forward(Graph& graph, const PolicyModel& model, const env::EnvState& state)
      : g(graph), m(model), s(state) {
    const auto nf = static_cast<std::size_t>(model.config().n_fragments);
    if (state.multiset.size() != nf) {
      throw Error("model expects " + std::to_string(nf) + " fragment types, state has " +
                  std::to_string(state.multiset.size()));
    }
    h_mol = m.molnet.apply(g, s.molecule);
    x_F = Tensor(1, static_cast<Eigen::Index>(nf));
    for (std::size_t f = 0; f < nf; ++f) x_F(0, static_cast<Eigen::Index>(f)) = s.multiset.remaining(f);
    h_F = nn::apply(g, m.mlp_multiset, g.constant(x_F));
  }

  int atoms() const { return static_cast<int>(s.molecule.size()); }

  Var hydrogen_logits() {
    Var parts[] = {h_mol, g.repeat_rows(h_F, atoms())};
    return nn::apply(g, m.mlp_v, g.concat_cols(parts));
  }

  Var atom_row(std::size_t v) {
    const int idx[] = {static_cast<int>(v)};
    return g.gather_rows(h_mol, idx);
  }

  Var fragment_logits(Var h_v) {
    Var parts[] = {h_v, h_F};
    return nn::apply(g, m.mlp_f, g.concat_cols(parts));
  }

  Var onehot(std::size_t f) {
    Tensor x = Tensor::Zero(1, m.config().n_fragments);
    x(0, static_cast<Eigen::Index>(f)) = 1.0;
    return g.constant(std::move(x));
  }

  Var fragment_atoms(std::size_t f) { return m.fragnet.apply(g, s.multiset.fragment(f).cloud); }

  Var fragment_hydrogen_logits(Var h_frag, Var h_v, Var x_f) {
    const int n = static_cast<int>(g.value(h_frag).rows());
    Var parts[] = {h_frag, g.repeat_rows(h_v, n), g.repeat_rows(h_F, n), g.repeat_rows(x_f, n)};
    return nn::apply(g, m.mlp_u, g.concat_cols(parts));
  }

  struct Continuous {
    Var mean_d, mean_phi, sign_logit;
  };

  Continuous continuous(Var h_frag, std::size_t u, Var h_v, Var x_f) {
    const int idx[] = {static_cast<int>(u)};
    Var parts[] = {g.gather_rows(h_frag, idx), h_v, h_F, x_f};
    Var x = g.concat_cols(parts);
    const auto& c = m.config();
    return {nn::rescale_sigmoid(g, nn::apply(g, m.mlp_d, x), c.min_distance, c.max_distance),
            nn::rescale_sigmoid(g, nn::apply(g, m.mlp_phi, x), 0.0, std::numbers::pi),
            nn::apply(g, m.mlp_sign, x)};
  }

  Var value() {
    Var parts[] = {g.sum_rows(h_mol), h_F};
    return nn::apply(g, m.mlp_value, g.concat_cols(parts));
  }
};

void check_legal(bool ok, const std::string& what) {
  if (!ok) throw env::IllegalAction("illegal action: " + what);
}

}  // namespace

PolicyTrace trace_policy(Graph& g, const PolicyModel& model, const env::EnvState& state,
                         const env::Action* given, std::mt19937_64* rng, bool with_value,
                         double bond_factor) {
  if (state.terminal) throw Error("policy queried on a terminal state");
  const env::ActionMasks masks = env::action_masks(state, bond_factor);
  const auto& cfg = model.config();
  Forward fw(g, model, state);
  PolicyTrace t;

  // Molecule hydrogen.
  Var logits_v = fw.hydrogen_logits();
  t.p_molecule_hydrogen = masked_probabilities(g.value(logits_v), masks.molecule_hydrogens);
  if (given != nullptr) {
    check_legal(given->molecule_hydrogen < masks.molecule_hydrogens.size() &&
                    masks.molecule_hydrogens[given->molecule_hydrogen],
                "molecule atom is not an anchorable hydrogen");
    t.action.molecule_hydrogen = given->molecule_hydrogen;
  } else if (rng == nullptr) {
    t.action.molecule_hydrogen = argmax(t.p_molecule_hydrogen);
  } else {
    t.action.molecule_hydrogen = sample_categorical(*rng, t.p_molecule_hydrogen);
  }
  const std::size_t v = t.action.molecule_hydrogen;
  Var lp_v = g.masked_log_softmax_at(logits_v, masks.molecule_hydrogens, v);
  Var ent = g.masked_entropy(logits_v, masks.molecule_hydrogens);

  // Fragment.
  Var h_v = fw.atom_row(v);
  Var logits_f = fw.fragment_logits(h_v);
  t.p_fragment = masked_probabilities(g.value(logits_f), masks.fragments);
  if (given != nullptr) {
    check_legal(given->fragment < masks.fragments.size() && masks.fragments[given->fragment],
                "fragment is exhausted or out of range");
    t.action.fragment = given->fragment;
  } else if (rng == nullptr) {
    t.action.fragment = argmax(t.p_fragment);
  } else {
    t.action.fragment = sample_categorical(*rng, t.p_fragment);
  }
  const std::size_t f = t.action.fragment;
  Var lp_f = g.masked_log_softmax_at(logits_f, masks.fragments, f);
  ent = g.add(ent, g.masked_entropy(logits_f, masks.fragments));

  // Fragment hydrogen.
  Var x_f = fw.onehot(f);
  Var h_frag = fw.fragment_atoms(f);
  Var logits_u = fw.fragment_hydrogen_logits(h_frag, h_v, x_f);
  const auto& mask_u = masks.fragment_hydrogens[f];
  t.p_fragment_hydrogen = masked_probabilities(g.value(logits_u), mask_u);
  if (given != nullptr) {
    check_legal(given->fragment_hydrogen < mask_u.size() && mask_u[given->fragment_hydrogen],
                "fragment atom is not an anchorable hydrogen");
    t.action.fragment_hydrogen = given->fragment_hydrogen;
  } else if (rng == nullptr) {
    t.action.fragment_hydrogen = argmax(t.p_fragment_hydrogen);
  } else {
    t.action.fragment_hydrogen = sample_categorical(*rng, t.p_fragment_hydrogen);
  }
  const std::size_t u = t.action.fragment_hydrogen;
  Var lp_u = g.masked_log_softmax_at(logits_u, mask_u, u);
  ent = g.add(ent, g.masked_entropy(logits_u, mask_u));

  // Distance, |phi| and sign.
  auto heads = fw.continuous(h_frag, u, h_v, x_f);
  t.continuous.mean_distance = g.item(heads.mean_d);
  t.continuous.mean_angle = g.item(heads.mean_phi);
  const double sign_logit = g.item(heads.sign_logit);
  t.continuous.p_sign = 1.0 / (1.0 + std::exp(-sign_logit));
  if (given != nullptr) {
    check_legal(given->distance >= cfg.min_distance && given->distance <= cfg.max_distance,
                "distance outside the placement range");
    check_legal(given->abs_angle >= 0.0 && given->abs_angle <= std::numbers::pi, "|phi| outside [0, pi]");
    check_legal(given->sign == 1 || given->sign == -1, "sign must be +1 or -1");
    t.action.distance = given->distance;
    t.action.abs_angle = given->abs_angle;
    t.action.sign = given->sign;
  } else if (rng == nullptr) {
    t.action.distance = t.continuous.mean_distance;
    t.action.abs_angle = t.continuous.mean_angle;
    t.action.sign = t.continuous.p_sign >= 0.5 ? 1 : -1;
  } else {
    t.action.distance = sample_truncated_normal(*rng, t.continuous.mean_distance, cfg.sigma_distance,
                                                cfg.min_distance, cfg.max_distance);
    t.action.abs_angle = sample_truncated_normal(*rng, t.continuous.mean_angle, cfg.sigma_angle, 0.0,
                                                 std::numbers::pi);
    const double draw = std::uniform_real_distribution<double>(0.0, 1.0)(*rng);
    t.action.sign = draw < t.continuous.p_sign ? 1 : -1;
  }
  Var lp_d = g.gaussian_log_prob(heads.mean_d, t.action.distance, cfg.sigma_distance);
  Var lp_phi = g.gaussian_log_prob(heads.mean_phi, t.action.abs_angle, cfg.sigma_angle);
  Var lp_sign = g.log_sigmoid(t.action.sign == 1 ? heads.sign_logit : g.scale(heads.sign_logit, -1.0));

  t.heads = {g.item(lp_v), g.item(lp_f), g.item(lp_u), g.item(lp_d), g.item(lp_phi), g.item(lp_sign)};
  t.head_log_probs = {lp_v, lp_f, lp_u, lp_d, lp_phi, lp_sign};
  t.log_prob = g.add(g.add(g.add(lp_v, lp_f), g.add(lp_u, lp_d)), g.add(lp_phi, lp_sign));
  t.entropy = ent;
  if (with_value) t.value = fw.value();
  return t;
}

SampledAction greedy_action(const PolicyModel& model, const env::EnvState& state, double bond_factor) {
  Graph g(&model.params(), false);
  PolicyTrace t = trace_policy(g, model, state, nullptr, nullptr, false, bond_factor);
  return {t.action, g.item(t.log_prob), t.heads};
}

SampledAction sample_action(const PolicyModel& model, const env::EnvState& state, std::mt19937_64& rng,
                            double bond_factor) {
  Graph g(&model.params(), false);
  PolicyTrace t = trace_policy(g, model, state, nullptr, &rng, false, bond_factor);
  return {t.action, g.item(t.log_prob), t.heads};
}

ActionEvaluation evaluate_action(const PolicyModel& model, const env::EnvState& state,
                                 const env::Action& action, double bond_factor) {
  Graph g(&model.params(), false);
  PolicyTrace t = trace_policy(g, model, state, &action, nullptr, false, bond_factor);
  return {g.item(t.log_prob), g.item(t.entropy)};
}

double state_value(const PolicyModel& model, const env::EnvState& state) {
  Graph g(&model.params(), false);
  Forward fw(g, model, state);
  return g.item(fw.value());
}

std::vector<double> molecule_hydrogen_distribution(const PolicyModel& model, const env::EnvState& state,
                                                   double bond_factor) {
  Graph g(&model.params(), false);
  Forward fw(g, model, state);
  return masked_probabilities(g.value(fw.hydrogen_logits()), env::anchor_hydrogen_mask(state.molecule, bond_factor));
}

std::vector<double> fragment_distribution(const PolicyModel& model, const env::EnvState& state,
                                          std::size_t molecule_hydrogen) {
  if (state.multiset.exhausted()) throw Error("fragment multiset is exhausted");
  Graph g(&model.params(), false);
  Forward fw(g, model, state);
  if (molecule_hydrogen >= state.molecule.size()) throw Error("molecule atom index out of range");
  std::vector<bool> mask(state.multiset.size());
  for (std::size_t f = 0; f < mask.size(); ++f) mask[f] = state.multiset.remaining(f) > 0;
  return masked_probabilities(g.value(fw.fragment_logits(fw.atom_row(molecule_hydrogen))), mask);
}

std::vector<double> fragment_hydrogen_distribution(const PolicyModel& model, const env::EnvState& state,
                                                   std::size_t molecule_hydrogen, std::size_t fragment) {
  Graph g(&model.params(), false);
  Forward fw(g, model, state);
  if (molecule_hydrogen >= state.molecule.size()) throw Error("molecule atom index out of range");
  if (fragment >= state.multiset.size()) throw Error("fragment index out of range");
  const auto& frag = state.multiset.fragment(fragment);
  std::vector<bool> mask(frag.cloud.size(), false);
  for (std::size_t h : frag.anchor_hydrogens) mask[h] = true;
  Var logits = fw.fragment_hydrogen_logits(fw.fragment_atoms(fragment), fw.atom_row(molecule_hydrogen),
                                           fw.onehot(fragment));
  return masked_probabilities(g.value(logits), mask);
}

ContinuousParameters continuous_parameters(const PolicyModel& model, const env::EnvState& state,
                                           std::size_t molecule_hydrogen, std::size_t fragment,
                                           std::size_t fragment_hydrogen) {
  Graph g(&model.params(), false);
  Forward fw(g, model, state);
  if (molecule_hydrogen >= state.molecule.size()) throw Error("molecule atom index out of range");
  if (fragment >= state.multiset.size()) throw Error("fragment index out of range");
  if (fragment_hydrogen >= state.multiset.fragment(fragment).cloud.size()) {
    throw Error("fragment atom index out of range");
  }
  auto heads = fw.continuous(fw.fragment_atoms(fragment), fragment_hydrogen, fw.atom_row(molecule_hydrogen),
                             fw.onehot(fragment));
  return {g.item(heads.mean_d), g.item(heads.mean_phi), 1.0 / (1.0 + std::exp(-g.item(heads.sign_logit)))};
}

}  // namespace fragforge::policy
