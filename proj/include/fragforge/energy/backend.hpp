#pragma once

#include <atomic>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "fragforge/chem/atom_cloud.hpp"
#include "fragforge/error.hpp"

namespace fragforge::energy {

class EnergyError : public Error {
 public:
  enum class Kind { process, timeout, parse, other };
  EnergyError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Energy of a point cloud in kcal/mol. Implementations must be invariant under
// rigid motion and atom reindexing.
class EnergyBackend {
 public:
  virtual ~EnergyBackend() = default;
  virtual double evaluate(const chem::AtomCloud& cloud) const = 0;
  virtual std::string name() const = 0;
  virtual bool deterministic() const = 0;
};

class ConstantBackend final : public EnergyBackend {
 public:
  explicit ConstantBackend(double value = 0.0) : value_(value) {}
  double evaluate(const chem::AtomCloud&) const override { return value_; }
  std::string name() const override { return "constant"; }
  bool deterministic() const override { return true; }

 private:
  double value_;
};

// Memoizes another backend, keyed on element symbols plus coordinates
// quantized to 1e-6 Angstrom. Safe for concurrent use.
class CachedBackend final : public EnergyBackend {
 public:
  explicit CachedBackend(std::shared_ptr<const EnergyBackend> inner, double quantum = 1e-6)
      : inner_(std::move(inner)), quantum_(quantum) {}

  double evaluate(const chem::AtomCloud& cloud) const override;
  std::string name() const override { return inner_->name(); }
  bool deterministic() const override { return inner_->deterministic(); }

  std::size_t hits() const;
  std::size_t misses() const;
  std::size_t size() const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<long long>& key) const;
  };

  std::shared_ptr<const EnergyBackend> inner_;
  double quantum_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::vector<long long>, double, KeyHash> cache_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

}  // namespace fragforge::energy
