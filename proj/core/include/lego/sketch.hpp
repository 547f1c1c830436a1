#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "lego/hashing.hpp"

namespace lego {

struct WeightBundle;

/// Common surface of every frequency sketch in the library.
class FrequencySketch {
 public:
  virtual ~FrequencySketch() = default;

  virtual void store(ItemKey key, double weight = 1.0) = 0;
  [[nodiscard]] virtual double query(ItemKey key) const = 0;

  void store(std::string_view item, double weight = 1.0) { store(ItemKey::of(item), weight); }
  [[nodiscard]] double query(std::string_view item) const { return query(ItemKey::of(item)); }

  [[nodiscard]] virtual std::string_view kind() const noexcept = 0;
  /// Bytes of counter/cell storage accounted against the budget.
  [[nodiscard]] virtual std::size_t memory_bytes() const noexcept = 0;
};

enum class SketchKind { cm, cs, lego, d_cms, d_lego };

std::string_view to_string(SketchKind kind) noexcept;
/// Accepts "cm", "cs", "lego", "d-cms", "d-lego". Throws
/// Errc::invalid_configuration otherwise.
SketchKind sketch_kind_from_string(std::string_view name);

enum class DecodeMode { rule_only, ensemble };

struct SketchOptions {
  std::uint64_t seed = 42;
  /// Required for ensemble decoding; rule-only Lego falls back to an
  /// untrained bundle derived from `seed`.
  std::shared_ptr<const WeightBundle> bundle;
  DecodeMode mode = DecodeMode::rule_only;
  std::uint32_t elastic_lambda = 8;
};

std::unique_ptr<FrequencySketch> make_sketch(SketchKind kind, std::size_t budget_bytes,
                                             const SketchOptions& options = {});

}  // namespace lego
