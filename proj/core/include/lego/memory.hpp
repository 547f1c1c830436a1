#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lego/embedding.hpp"

namespace lego {

/// a_i: one column index per row.
using AddressVector = RowVector<std::uint32_t>;

struct BrickRead {
  EmbeddingVector m;   // m_i = M^T a_i, one value per row
  double count = 0.0;  // sub-stream length (sum of stored weights)
};

/// One d1 x d2 additive memory matrix with its counting bucket.
///
/// Cells are 32-bit floats, row-major, so a default 5 x 5120 brick occupies
/// exactly 102400 bytes. The counter sits outside that figure.
class MemoryBrick {
 public:
  static constexpr std::size_t kDefaultRows = 5;
  static constexpr std::size_t kDefaultColumns = 5120;

  MemoryBrick(std::size_t rows = kDefaultRows, std::size_t columns = kDefaultColumns);

  /// matrix[k][a[k]] += weight * v[k] for each row; count += weight. The
  /// product is rounded to the nearest float32, the cell sum toward +inf.
  void store(const EmbeddingVector& v, const AddressVector& a, double weight = 1.0) noexcept;

  [[nodiscard]] BrickRead read(const AddressVector& a) const noexcept;

  /// Elementwise sum, rounded toward +inf. Throws Errc::invalid_merge on shape mismatch.
  void merge(const MemoryBrick& other);

  void clear() noexcept;

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t columns() const noexcept { return columns_; }
  [[nodiscard]] double item_count() const noexcept { return item_count_; }
  [[nodiscard]] float cell(std::size_t row, std::size_t column) const noexcept {
    return cells_[row * columns_ + column];
  }
  [[nodiscard]] std::span<const float> cells() const noexcept { return cells_; }
  [[nodiscard]] std::size_t footprint_bytes() const noexcept {
    return cells_.size() * sizeof(float);
  }

  /// Snapshot: "LEGOBRK1", rows and columns as u32 LE, item_count as
  /// IEEE-754 binary64 LE, then rows*columns f32 LE cells row-major.
  void write_snapshot(std::ostream& out) const;
  static MemoryBrick read_snapshot(std::istream& in);
  void save(const std::string& path) const;
  static MemoryBrick load(const std::string& path);

  friend bool operator==(const MemoryBrick&, const MemoryBrick&) = default;

 private:
  std::size_t rows_;
  std::size_t columns_;
  std::vector<float> cells_;
  double item_count_ = 0.0;
};

/// Bytes of one brick's cell matrix.
constexpr std::size_t brick_bytes(std::size_t rows, std::size_t columns) noexcept {
  return rows * columns * sizeof(float);
}

/// K = floor(budget / brick_bytes), at least 1.
std::size_t bricks_for_budget(std::size_t budget_bytes, std::size_t rows, std::size_t columns);

}  // namespace lego
