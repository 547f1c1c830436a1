#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lego/hashing.hpp"

namespace lego {

/// Upper bound on d1. Per-item vectors live inline so the store/query hot
/// path does not allocate.
inline constexpr std::size_t kMaxRows = 16;

/// Fixed-capacity vector of d1 values, one per memory row.
template <typename T>
class RowVector {
 public:
  RowVector() = default;
  explicit RowVector(std::size_t size) : size_(size) {}
  RowVector(std::initializer_list<T> init) : size_(init.size()) {
    std::size_t i = 0;
    for (const T& x : init) data_[i++] = x;
  }

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  [[nodiscard]] std::span<const T> span() const noexcept { return {data_.data(), size_}; }
  [[nodiscard]] std::span<T> span() noexcept { return {data_.data(), size_}; }

  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.begin() + static_cast<std::ptrdiff_t>(size_); }

  friend bool operator==(const RowVector& a, const RowVector& b) {
    if (a.size_ != b.size_) return false;
    for (std::size_t i = 0; i < a.size_; ++i)
      if (a.data_[i] != b.data_[i]) return false;
    return true;
  }

 private:
  std::array<T, kMaxRows> data_{};
  std::size_t size_ = 0;
};

/// v_i: strictly positive, L1-normalized (unless normalization is ablated).
using EmbeddingVector = RowVector<double>;

/// The learnable vector V together with the d1 hash seeds that index it.
///
/// Values are kept inside [clamp_epsilon, 1]; the check happens when values
/// are installed, never on read.
class EmbeddingTable {
 public:
  static constexpr std::size_t kDefaultDim = 80;
  static constexpr double kDefaultClampEpsilon = 0.001;

  /// Throws Errc::invalid_configuration if any value lies outside
  /// [clamp_epsilon, 1], if seeds is empty or has more than kMaxRows entries.
  EmbeddingTable(std::vector<double> values, std::vector<HashSeed> seeds,
                 double clamp_epsilon = kDefaultClampEpsilon);

  /// Untrained table: values[i] = eps + (1 - eps) * (i + 0.5) / v_dim.
  static EmbeddingTable linear_spread(std::size_t v_dim, std::vector<HashSeed> seeds,
                                      double clamp_epsilon = kDefaultClampEpsilon);

  /// Components are rounded to float32 values, the precision of a memory cell.
  [[nodiscard]] EmbeddingVector embed(ItemKey key) const noexcept;
  [[nodiscard]] EmbeddingVector embed(std::string_view item) const noexcept {
    return embed(ItemKey::of(item));
  }

  /// Raw lookups V[H_k(x)] before normalization.
  [[nodiscard]] EmbeddingVector lookup(ItemKey key) const noexcept;

  /// Installs new values, clamping each into [clamp_epsilon, 1]. Throws
  /// Errc::unsupported_operation when the table is frozen.
  void assign_clamped(std::span<const double> values);

  void set_normalize(bool on) noexcept { normalize_ = on; }
  [[nodiscard]] bool normalize() const noexcept { return normalize_; }
  void freeze() noexcept { frozen_ = true; }
  [[nodiscard]] bool frozen() const noexcept { return frozen_; }

  [[nodiscard]] std::size_t rows() const noexcept { return seeds_.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return values_.size(); }
  [[nodiscard]] double clamp_epsilon() const noexcept { return clamp_epsilon_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] const std::vector<HashSeed>& seeds() const noexcept { return seeds_; }

 private:
  std::vector<double> values_;
  std::vector<HashSeed> seeds_;
  double clamp_epsilon_;
  bool normalize_ = true;
  bool frozen_ = false;
};

}  // namespace lego
