#include "fragforge/nn/parameters.hpp"

#include <Eigen/QR>
#include <cmath>

#include "fragforge/error.hpp"

namespace fragforge::nn {

ParamId ParameterSet::add(std::string name, Tensor value) {
  if (index_.count(name) != 0) throw Error("duplicate parameter name '" + name + "'");
  ParamId id = values_.size();
  index_.emplace(name, id);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return id;
}

std::optional<ParamId> ParameterSet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParameterSet::element_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

std::vector<Tensor> ParameterSet::zeros_like() const {
  std::vector<Tensor> out;
  out.reserve(values_.size());
  for (const auto& v : values_) out.push_back(Tensor::Zero(v.rows(), v.cols()));
  return out;
}

bool ParameterSet::operator==(const ParameterSet& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i].rows() != other.values_[i].rows() ||
        values_[i].cols() != other.values_[i].cols() || values_[i] != other.values_[i]) {
      return false;
    }
  }
  return true;
}

void add_into(Gradients& acc, const Gradients& g, double scale) {
  if (acc.size() != g.size()) throw Error("gradient layout mismatch");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * g[i];
}

double global_norm(const Gradients& g) {
  double sq = 0.0;
  for (const auto& t : g) sq += t.squaredNorm();
  return std::sqrt(sq);
}

double clip_global_norm(Gradients& g, double max_norm) {
  const double norm = global_norm(g);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& t : g) t *= s;
  }
  return norm;
}

void orthogonal_init(Tensor& t, std::mt19937_64& rng, double gain) {
  const Eigen::Index rows = t.rows();
  const Eigen::Index cols = t.cols();
  if (rows == 0 || cols == 0) return;
  const bool tall = rows >= cols;
  const Eigen::Index big = tall ? rows : cols;
  const Eigen::Index small = tall ? cols : rows;
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(big, small);
  for (Eigen::Index i = 0; i < big; ++i) {
    for (Eigen::Index j = 0; j < small; ++j) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < small; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  if (tall) {
    t = gain * q;
  } else {
    t = gain * q.transpose();
  }
}

}  // namespace fragforge::nn
