#pragma once

#include <string>

#include "fragforge/energy/backend.hpp"

namespace fragforge::energy {

// Runs an external program per evaluation. `command` is a shell command in
// which every "{xyz}" is replaced by the path of a temporary XYZ file; the
// program must print a single number on stdout, which is multiplied by
// `unit_factor` (e.g. 627.509 for hartree -> kcal/mol).
struct ExternalAdapterConfig {
  std::string command;
  double unit_factor = 1.0;
  double timeout_seconds = 60.0;
};

double external_backend_evaluate(const chem::AtomCloud& cloud, const ExternalAdapterConfig& config);

class ExternalBackend final : public EnergyBackend {
 public:
  explicit ExternalBackend(ExternalAdapterConfig config) : config_(std::move(config)) {}
  double evaluate(const chem::AtomCloud& cloud) const override {
    return external_backend_evaluate(cloud, config_);
  }
  std::string name() const override { return "external"; }
  bool deterministic() const override { return false; }
  const ExternalAdapterConfig& config() const { return config_; }

 private:
  ExternalAdapterConfig config_;
};

}  // namespace fragforge::energy
