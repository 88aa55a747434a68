#include "fragforge/cli/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "fragforge/chem/fragment_library.hpp"
#include "fragforge/chem/xyz.hpp"
#include "fragforge/energy/external.hpp"
#include "fragforge/energy/surrogate.hpp"
#include "fragforge/eval/snapshot.hpp"
#include "fragforge/nn/checkpoint.hpp"
#include "fragforge/trainer/trainer.hpp"

namespace fragforge::cli {

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

chem::FragmentMultiset load_library(const RunConfig& cfg) {
  if (cfg.manifest.empty()) throw ConfigError("config does not name a fragment manifest");
  if (!std::filesystem::exists(cfg.manifest)) throw ConfigError("fragment manifest not found: " + cfg.manifest.string());
  try {
    return chem::load_fragment_library(cfg.manifest);
  } catch (const Error& e) {
    throw ConfigError("cannot load fragment manifest " + cfg.manifest.string() + ": " + e.what());
  }
}

env::StartSpec start_spec(const RunConfig& cfg, const chem::FragmentMultiset& lib) {
  if (cfg.start == "random") return env::StartSpec::random();
  for (std::size_t f = 0; f < lib.size(); ++f) {
    if (lib.fragment(f).id == cfg.start) return env::StartSpec::fixed(f);
  }
  throw ConfigError("start fragment '" + cfg.start + "' is not in the manifest");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::shared_ptr<const energy::EnergyBackend> make_backend(const RunConfig& config) {
  std::shared_ptr<const energy::EnergyBackend> b;
  if (config.backend == "external") {
    b = std::make_shared<energy::ExternalBackend>(config.external);
  } else {
    auto params = config.surrogate;
    params.bond_factor = config.env.bond_factor;
    b = std::make_shared<energy::SurrogateBackend>(params);
  }
  if (config.cache_energies) b = std::make_shared<energy::CachedBackend>(b);
  return b;
}

std::optional<int> workers_from_environment() {
  const char* v = std::getenv("FRAGFORGE_WORKERS");
  if (v == nullptr || *v == '\0') return std::nullopt;
  int n = 0;
  const std::string s(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || p != s.data() + s.size() || n < 1) {
    throw ConfigError("FRAGFORGE_WORKERS must be a positive integer, got '" + s + "'");
  }
  return n;
}

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  chem::FragmentMultiset library;
  std::shared_ptr<const energy::EnergyBackend> backend;
  trainer::TrainConfig tc;
  try {
    cfg = load_config(opts.config);
    for (const auto& o : opts.overrides) apply_override(cfg, o);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out) cfg.out_dir = *opts.out;
    if (auto w = workers_from_environment()) cfg.ppo.workers = *w;
    library = load_library(cfg);
    backend = make_backend(cfg);
    tc.ppo = cfg.ppo;
    tc.model = cfg.model;
    tc.model.seed = cfg.seed;
    tc.env = cfg.env;
    tc.start = start_spec(cfg, library);
    tc.seed = cfg.seed;
    tc.eval_samples = cfg.eval_samples;
    tc.eval_greedy = cfg.eval_greedy;
    tc.out_dir = cfg.out_dir;
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string config_text = serialize_config(cfg);
    write_text(cfg.out_dir / "config.yaml", config_text);
    nlohmann::json prov = {{"seed", cfg.seed},
                           {"manifest", std::filesystem::absolute(cfg.manifest).string()},
                           {"library", library.catalog().name},
                           {"library_hash", hex(library.catalog().content_hash)},
                           {"backend", backend->name()},
                           {"workers", cfg.ppo.workers}};
    write_text(cfg.out_dir / "provenance.json", prov.dump(2) + "\n");
    tc.checkpoint_metadata = {{"run_config", config_text},
                              {"manifest", std::filesystem::absolute(cfg.manifest).string()},
                              {"library_hash", hex(library.catalog().content_hash)}};
    auto result = trainer::train(tc, library, backend);
    out << "trained " << result.steps << " steps, " << result.updates << " updates, "
        << result.episodes.size() << " episodes; output in " << cfg.out_dir.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_generate(const GenerateOptions& opts, std::ostream& out, std::ostream& err) {
  if (opts.n < 0) {
    err << "config error: n must be non-negative\n";
    return kExitConfig;
  }
  std::unique_ptr<policy::PolicyModel> model;
  RunConfig cfg;
  chem::FragmentMultiset library;
  try {
    auto ckpt = nn::load_checkpoint(opts.checkpoint);
    model = std::make_unique<policy::PolicyModel>(policy::PolicyModel::from_checkpoint(ckpt));
    auto rc = ckpt.metadata.find("run_config");
    auto mf = ckpt.metadata.find("manifest");
    if (rc == ckpt.metadata.end() || mf == ckpt.metadata.end()) {
      throw nn::CheckpointError("checkpoint carries no run configuration");
    }
    cfg = parse_config(rc->second);
    cfg.manifest = mf->second;
    library = load_library(cfg);
    auto h = ckpt.metadata.find("library_hash");
    if (h != ckpt.metadata.end() && h->second != hex(library.catalog().content_hash)) {
      throw ConfigError("fragment library changed since the checkpoint was written (" + cfg.manifest.string() + ")");
    }
    if (static_cast<std::size_t>(model->config().n_fragments) != library.size()) {
      throw ConfigError("checkpoint expects " + std::to_string(model->config().n_fragments) + " fragment types");
    }
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    auto backend = make_backend(cfg);
    env::Environment env(library, backend, cfg.env, start_spec(cfg, library));
    std::filesystem::create_directories(opts.out);
    std::mt19937_64 rng(opts.seed);
    eval::CumulativeValidity validity;
    nlohmann::json summary;
    summary["checkpoint"] = opts.checkpoint.string();
    summary["seed"] = opts.seed;
    summary["greedy"] = opts.greedy;
    summary["structures"] = nlohmann::json::array();
    for (int i = 0; i < opts.n; ++i) {
      const std::uint64_t reset_seed = rng();
      auto ep = eval::run_episode(*model, env, reset_seed, rng, opts.greedy);
      validity.add(ep.validity);
      const std::string file = "generated_" + std::to_string(i) + ".xyz";
      chem::write_xyz_file(opts.out / file, ep.structure,
                           "episode=" + std::to_string(i) + " formula=" + ep.structure.formula().to_string());
      summary["structures"].push_back({{"file", file},
                                       {"formula", ep.structure.formula().to_string()},
                                       {"return", ep.episode_return},
                                       {"energy_kcal_mol", finite_or_null(ep.energy)},
                                       {"termination", env::to_string(ep.termination)},
                                       {"rotation_valid", ep.validity.rotation_valid},
                                       {"bond_valid", ep.validity.bond_valid},
                                       {"reason", eval::to_string(ep.validity.reason)}});
    }
    summary["rotation_validity"] = validity.rotation_ratio();
    summary["bond_validity"] = validity.bond_ratio();
    summary["count"] = validity.total();
    write_text(opts.out / "summary.json", summary.dump(2) + "\n");
    out << "generated " << opts.n << " structures in " << opts.out.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_validate(const std::filesystem::path& xyz, std::ostream& out, std::ostream& err) {
  chem::AtomCloud cloud;
  try {
    cloud = chem::read_xyz_file(xyz);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  auto r = eval::classify_validity(cloud);
  nlohmann::json j = {{"file", xyz.string()},
                      {"formula", cloud.formula().to_string()},
                      {"rotation_valid", r.rotation_valid},
                      {"bond_valid", r.bond_valid},
                      {"reason", eval::to_string(r.reason)},
                      {"components", r.component_formulas}};
  out << j.dump() << "\n";
  return kExitOk;
}

int cmd_energy(const EnergyOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  chem::AtomCloud cloud;
  try {
    if (opts.config) cfg = load_config(*opts.config);
    for (const auto& o : opts.overrides) apply_override(cfg, o);
    cloud = chem::read_xyz_file(opts.xyz);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const double e = make_backend(cfg)->evaluate(cloud);
    nlohmann::json j = {{"file", opts.xyz.string()}, {"backend", cfg.backend}, {"energy_kcal_mol", e}};
    out << j.dump() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace fragforge::cli
