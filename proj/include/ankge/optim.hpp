#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace ankge {

/// Gradient rows for one parameter table, touched rows only. Rows keep their
/// first-touch order so reductions are deterministic.
class SparseRowGrad {
 public:
  explicit SparseRowGrad(int width = 0) : width_(width) {}

  /// Zero-initialized on first access.
  std::span<double> row(std::int32_t id);
  int width() const { return width_; }
  std::span<const std::int32_t> rows() const { return rows_; }
  std::span<const double> values(std::size_t slot) const;
  void clear();

  /// dense[row * width + i] += values for every touched row.
  void add_to_dense(std::span<double> dense) const;

 private:
  int width_;
  std::unordered_map<std::int32_t, std::size_t> slots_;
  std::vector<std::int32_t> rows_;
  // One buffer per row so spans handed out earlier stay valid. Buffers are
  // reused after clear(); only the first rows_.size() are live.
  std::vector<std::vector<double>> values_;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Dense Adam with bias correction, one instance per parameter tensor.
class Adam {
 public:
  Adam(std::size_t size, AdamOptions options);

  void step(std::span<double> params, std::span<const double> grad);
  std::int64_t steps() const { return t_; }

 private:
  AdamOptions opt_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

/// Deterministic 64-bit mixer for deriving per-item seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ankge
