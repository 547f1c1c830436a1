#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lego/hashing.hpp"
#include "lego/sketch.hpp"

namespace lego {

/// Count-min sketch: depth rows of 32-bit counters, min-of-rows query.
/// Weights are rounded to the nearest integer; overflow is not checked.
class CmSketch final : public FrequencySketch {
 public:
  static constexpr std::size_t kDefaultDepth = 3;

  CmSketch(std::size_t width, std::vector<HashSeed> row_seeds);
  /// width = floor(budget / (4 * depth)). Throws Errc::invalid_configuration
  /// when that leaves no counters.
  static CmSketch for_budget(std::size_t budget_bytes, std::uint64_t seed,
                             std::size_t depth = kDefaultDepth);

  using FrequencySketch::query;
  using FrequencySketch::store;
  void store(ItemKey key, double weight = 1.0) override;
  [[nodiscard]] double query(ItemKey key) const override;

  [[nodiscard]] std::string_view kind() const noexcept override { return "cm"; }
  [[nodiscard]] std::size_t memory_bytes() const noexcept override {
    return counters_.size() * sizeof(std::int32_t);
  }

  [[nodiscard]] std::size_t depth() const noexcept { return seeds_.size(); }
  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] const std::vector<HashSeed>& row_seeds() const noexcept { return seeds_; }
  [[nodiscard]] std::int32_t counter(std::size_t row, std::size_t column) const {
    return counters_.at(row * width_ + column);
  }

 private:
  std::size_t width_;
  std::vector<HashSeed> seeds_;
  std::vector<std::int32_t> counters_;
};

/// Count sketch: signed updates, median-of-rows query. With an even depth
/// the upper middle element is returned.
class CSketch final : public FrequencySketch {
 public:
  static constexpr std::size_t kDefaultDepth = 3;

  CSketch(std::size_t width, std::vector<HashSeed> row_seeds, std::vector<HashSeed> sign_seeds);
  static CSketch for_budget(std::size_t budget_bytes, std::uint64_t seed,
                            std::size_t depth = kDefaultDepth);

  using FrequencySketch::query;
  using FrequencySketch::store;
  void store(ItemKey key, double weight = 1.0) override;
  [[nodiscard]] double query(ItemKey key) const override;

  [[nodiscard]] std::string_view kind() const noexcept override { return "cs"; }
  [[nodiscard]] std::size_t memory_bytes() const noexcept override {
    return counters_.size() * sizeof(std::int32_t);
  }

  /// +1 or -1 for the given row.
  [[nodiscard]] int sign(std::size_t row, ItemKey key) const noexcept;

  [[nodiscard]] std::size_t depth() const noexcept { return row_seeds_.size(); }
  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] const std::vector<HashSeed>& row_seeds() const noexcept { return row_seeds_; }
  [[nodiscard]] const std::vector<HashSeed>& sign_seeds() const noexcept { return sign_seeds_; }
  [[nodiscard]] std::int32_t counter(std::size_t row, std::size_t column) const {
    return counters_.at(row * width_ + column);
  }

 private:
  std::size_t width_;
  std::vector<HashSeed> row_seeds_;
  std::vector<HashSeed> sign_seeds_;
  std::vector<std::int32_t> counters_;
};

/// One heavy-part slot. vote_pos == 0 marks an empty slot.
struct HeavyBucket {
  std::uint64_t key = 0;
  std::uint32_t vote_pos = 0;
  std::uint32_t vote_neg = 0;
  bool flag = false;  // the occupant may also have mass in the light part

  friend bool operator==(const HeavyBucket&, const HeavyBucket&) = default;
};

/// Elastic derivative: a direct-mapped voting filter in front of any core
/// sketch. Frequent items are counted exactly in the heavy part; everything
/// else, and every evicted occupant, goes to the light core.
///
/// Only unit inserts are supported.
class ElasticSketch final : public FrequencySketch {
 public:
  static constexpr std::size_t kBucketBytes = 17;
  static constexpr std::uint32_t kDefaultLambda = 8;

  ElasticSketch(std::size_t buckets, HashSeed slot_seed, std::uint32_t lambda,
                std::unique_ptr<FrequencySketch> light);

  using FrequencySketch::query;
  using FrequencySketch::store;
  /// Throws Errc::unsupported_operation for any weight other than 1.
  void store(ItemKey key, double weight = 1.0) override;
  [[nodiscard]] double query(ItemKey key) const override;

  [[nodiscard]] std::string_view kind() const noexcept override { return kind_; }
  [[nodiscard]] std::size_t memory_bytes() const noexcept override {
    return heavy_.size() * kBucketBytes + light_->memory_bytes();
  }

  [[nodiscard]] std::size_t slot_of(ItemKey key) const noexcept;
  [[nodiscard]] const std::vector<HeavyBucket>& heavy() const noexcept { return heavy_; }
  [[nodiscard]] const FrequencySketch& light() const noexcept { return *light_; }
  [[nodiscard]] std::uint32_t lambda() const noexcept { return lambda_; }
  /// Total weight forwarded to the light part so far.
  [[nodiscard]] double light_weight() const noexcept { return light_weight_; }

 private:
  std::vector<HeavyBucket> heavy_;
  HashSeed slot_seed_;
  std::uint32_t lambda_;
  std::unique_ptr<FrequencySketch> light_;
  std::string kind_;
  double light_weight_ = 0.0;
};

/// floor((budget / 4) / 17), at least 1.
std::size_t heavy_buckets_for_budget(std::size_t budget_bytes) noexcept;

}  // namespace lego
