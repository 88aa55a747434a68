#include <iostream>

#include <CLI11.hpp>

#include "fragforge/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace fragforge::cli;

  CLI::App app{"Fragment-based 3D molecule builder trained with PPO"};
  app.require_subcommand(1);

  TrainOptions train;
  std::uint64_t train_seed = 0;
  std::string train_out;
  auto* t = app.add_subcommand("train", "Train a policy from a run config");
  t->add_option("--config", train.config, "YAML run config")->required();
  t->add_option("--override", train.overrides, "key=value, repeatable");
  auto* seed_opt = t->add_option("--seed", train_seed, "Overrides the config seed");
  auto* out_opt = t->add_option("--out", train_out, "Overrides the output directory");

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Sample structures from a checkpoint");
  g->add_option("--checkpoint", gen.checkpoint, "Checkpoint file")->required();
  g->add_option("-n,--n", gen.n, "Number of structures")->capture_default_str();
  g->add_option("--seed", gen.seed, "Sampling seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->capture_default_str();
  g->add_flag("--greedy", gen.greedy, "Take the most likely action instead of sampling");

  std::filesystem::path validate_xyz;
  auto* v = app.add_subcommand("validate", "Classify the validity of an XYZ structure");
  v->add_option("xyz", validate_xyz, "XYZ file")->required();

  EnergyOptions energy;
  std::filesystem::path energy_config;
  auto* e = app.add_subcommand("energy", "Score an XYZ structure with the configured backend");
  e->add_option("xyz", energy.xyz, "XYZ file")->required();
  auto* energy_config_opt = e->add_option("--config", energy_config, "YAML run config for the backend");
  e->add_option("--override", energy.overrides, "key=value, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }

  if (t->parsed()) {
    if (*seed_opt) train.seed = train_seed;
    if (*out_opt) train.out = train_out;
    return cmd_train(train, std::cout, std::cerr);
  }
  if (g->parsed()) return cmd_generate(gen, std::cout, std::cerr);
  if (v->parsed()) return cmd_validate(validate_xyz, std::cout, std::cerr);
  if (*energy_config_opt) energy.config = energy_config;
  return cmd_energy(energy, std::cout, std::cerr);
}
