#include "ankge/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ankge {

std::span<double> SparseRowGrad::row(std::int32_t id) {
  const auto w = static_cast<std::size_t>(width_);
  auto [it, inserted] = slots_.try_emplace(id, rows_.size());
  if (inserted) {
    rows_.push_back(id);
    if (rows_.size() > values_.size()) {
      values_.emplace_back(w, 0.0);
    } else {
      std::fill(values_[rows_.size() - 1].begin(), values_[rows_.size() - 1].end(), 0.0);
    }
  }
  return values_[it->second];
}

std::span<const double> SparseRowGrad::values(std::size_t slot) const {
  return values_[slot];
}

void SparseRowGrad::clear() {
  slots_.clear();
  rows_.clear();
}

void SparseRowGrad::add_to_dense(std::span<double> dense) const {
  const auto w = static_cast<std::size_t>(width_);
  for (std::size_t slot = 0; slot < rows_.size(); ++slot) {
    const std::size_t base = static_cast<std::size_t>(rows_[slot]) * w;
    for (std::size_t i = 0; i < w; ++i) dense[base + i] += values_[slot][i];
  }
}

Adam::Adam(std::size_t size, AdamOptions options) : opt_(options), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("Adam size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  const double step = opt_.learning_rate / c1;
  const double sqrt_c2 = std::sqrt(c2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * grad[i];
    v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * grad[i] * grad[i];
    params[i] -= step * m_[i] / (std::sqrt(v_[i]) / sqrt_c2 + opt_.epsilon);
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace ankge
