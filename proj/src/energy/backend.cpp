#include "fragforge/energy/backend.hpp"

#include <cmath>
#include <mutex>

#include "fragforge/chem/fragment_library.hpp"

namespace fragforge::energy {

std::size_t CachedBackend::KeyHash::operator()(const std::vector<long long>& key) const {
  return static_cast<std::size_t>(chem::fnv1a64(std::string_view(
      reinterpret_cast<const char*>(key.data()), key.size() * sizeof(long long))));
}

double CachedBackend::evaluate(const chem::AtomCloud& cloud) const {
  std::vector<long long> key;
  key.reserve(cloud.size() * 4);
  for (const auto& a : cloud.atoms()) {
    key.push_back(static_cast<long long>(a.element));
    for (int k = 0; k < 3; ++k) key.push_back(std::llround(a.position[k] / quantum_));
  }
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  const double e = inner_->evaluate(cloud);
  std::unique_lock lock(mutex_);
  ++misses_;
  cache_.emplace(std::move(key), e);
  return e;
}

std::size_t CachedBackend::hits() const { return hits_.load(); }

std::size_t CachedBackend::misses() const { return misses_.load(); }

std::size_t CachedBackend::size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

}  // namespace fragforge::energy
