#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lego/bundle.hpp"
#include "lego/embedding.hpp"
#include "lego/memory.hpp"
#include "lego/sketch.hpp"

namespace lego {

/// Global stream characteristics reconstructed from one brick.
struct StreamCharacteristics {
  std::vector<double> s;  // raw scan output, s_dim values
  double s_n = 0.0;       // estimated distinct count, exp(s[0]) - 1
  double s_alpha = 0.0;   // estimated skewness, s[1]
};

/// Everything a query computed on the way to its answer.
struct QueryTrace {
  std::size_t brick = 0;
  EmbeddingVector v;
  AddressVector a;
  BrickRead read;
  double rule_raw = 0.0;  // min(m / v), may be negative under deletions
  double rule = 0.0;      // rule_raw clamped at zero
  std::optional<double> neural;
  std::optional<StreamCharacteristics> characteristics;
  bool used_neural = false;
  double estimate = 0.0;
};

/// min_k m[k] / v[k]. Requires v componentwise positive.
double rule_estimate(std::span<const double> m, std::span<const double> v) noexcept;

/// exp(y) - 1 clamped at zero; the decode network's output transform.
double decode_output(double y) noexcept;

/// The assembled sketch: K memory bricks behind hash routing, normalized
/// multi-hash embedding, hash addressing, and either rule-only or ensemble
/// decoding.
///
/// Stores to a brick need exclusive access. Queries are safe to run
/// concurrently while no store is in flight; the scan cache is guarded.
class LegoSketch final : public FrequencySketch {
 public:
  LegoSketch(std::shared_ptr<const WeightBundle> bundle, std::size_t bricks,
             DecodeMode mode = DecodeMode::rule_only);

  /// K = floor(budget / brick bytes), at least 1.
  static LegoSketch for_budget(std::shared_ptr<const WeightBundle> bundle,
                               std::size_t budget_bytes, DecodeMode mode = DecodeMode::rule_only);

  LegoSketch(LegoSketch&&) noexcept;
  LegoSketch& operator=(LegoSketch&&) noexcept;
  ~LegoSketch() override;

  using FrequencySketch::query;
  using FrequencySketch::store;

  [[nodiscard]] AddressVector address(ItemKey key) const noexcept;
  [[nodiscard]] std::size_t brick_of(ItemKey key) const noexcept;
  [[nodiscard]] EmbeddingVector embed(ItemKey key) const noexcept { return table_.embed(key); }

  void store(ItemKey key, double weight = 1.0) override;
  [[nodiscard]] double query(ItemKey key) const override;
  [[nodiscard]] QueryTrace trace(ItemKey key) const;

  /// Deepsets scan over the first scan_subset_columns columns. Throws
  /// Errc::scanner_unavailable in rule-only mode.
  [[nodiscard]] StreamCharacteristics scan(std::size_t brick_index) const;

  /// Brickwise sum. Throws Errc::invalid_merge unless both sketches share
  /// the same layout (shape, seeds, table) and brick count.
  void merge(const LegoSketch& other);

  [[nodiscard]] std::string_view kind() const noexcept override { return "lego"; }
  [[nodiscard]] std::size_t memory_bytes() const noexcept override;

  [[nodiscard]] std::size_t brick_count() const noexcept { return bricks_.size(); }
  [[nodiscard]] const MemoryBrick& brick(std::size_t i) const { return bricks_.at(i); }
  [[nodiscard]] const WeightBundle& bundle() const noexcept { return *bundle_; }
  [[nodiscard]] const EmbeddingTable& table() const noexcept { return table_; }
  [[nodiscard]] DecodeMode mode() const noexcept { return mode_; }

 private:
  struct ScanCache;

  [[nodiscard]] StreamCharacteristics scan_uncached(std::size_t brick_index) const;
  [[nodiscard]] StreamCharacteristics cached_scan(std::size_t brick_index) const;
  void invalidate(std::size_t brick_index);

  std::shared_ptr<const WeightBundle> bundle_;
  EmbeddingTable table_;
  std::vector<MemoryBrick> bricks_;
  DecodeMode mode_;
  std::unique_ptr<ScanCache> cache_;
};

}  // namespace lego
