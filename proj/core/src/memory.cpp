#include "lego/memory.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "lego/error.hpp"

namespace lego {
namespace {

constexpr std::array<char, 8> kMagic = {'L', 'E', 'G', 'O', 'B', 'R', 'K', '1'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> buf{};
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(buf.data(), buf.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw Error(Errc::io_error, "truncated brick snapshot");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(buf[i]) << (8 * i);
  }
  return value;
}

/// cell + delta rounded toward +inf. Both operands are float32; TwoSum keeps
/// the residual of the double addition so the comparison is exact.
inline float add_up(float cell, float delta) noexcept {
  const double c = cell;
  const double d = delta;
  const double s = c + d;
  const double t = s - c;
  const double residual = (c - (s - t)) + (d - t);
  float out = static_cast<float>(s);
  if (static_cast<double>(out) - s < residual) {
    out = std::nextafter(out, std::numeric_limits<float>::infinity());
  }
  return out;
}

}  // namespace

MemoryBrick::MemoryBrick(std::size_t rows, std::size_t columns)
    : rows_(rows), columns_(columns) {
  if (rows == 0 || rows > kMaxRows || columns == 0) {
    std::ostringstream msg;
    msg << "brick shape " << rows << "x" << columns << " is invalid (rows in [1, "
        << kMaxRows << "], columns >= 1)";
    throw Error(Errc::invalid_configuration, msg.str());
  }
  cells_.assign(rows * columns, 0.0f);
}

void MemoryBrick::store(const EmbeddingVector& v, const AddressVector& a,
                        double weight) noexcept {
  for (std::size_t k = 0; k < rows_; ++k) {
    float& cell = cells_[k * columns_ + a[k]];
    cell = add_up(cell, static_cast<float>(weight * v[k]));
  }
  item_count_ += weight;
}

BrickRead MemoryBrick::read(const AddressVector& a) const noexcept {
  BrickRead out{EmbeddingVector(rows_), item_count_};
  for (std::size_t k = 0; k < rows_; ++k) {
    out.m[k] = cells_[k * columns_ + a[k]];
  }
  return out;
}

void MemoryBrick::merge(const MemoryBrick& other) {
  if (rows_ != other.rows_ || columns_ != other.columns_) {
    std::ostringstream msg;
    msg << "cannot merge brick " << other.rows_ << "x" << other.columns_ << " into "
        << rows_ << "x" << columns_;
    throw Error(Errc::invalid_merge, msg.str());
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    cells_[i] = add_up(cells_[i], other.cells_[i]);
  }
  item_count_ += other.item_count_;
}

void MemoryBrick::clear() noexcept {
  std::fill(cells_.begin(), cells_.end(), 0.0f);
  item_count_ = 0.0;
}

void MemoryBrick::write_snapshot(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rows_));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(columns_));
  put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(item_count_));
  for (float c : cells_) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(c));
  if (!out) throw Error(Errc::io_error, "failed writing brick snapshot");
}

MemoryBrick MemoryBrick::read_snapshot(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(Errc::io_error, "not a brick snapshot (bad magic)");
  }
  const auto rows = get_le<std::uint32_t>(in);
  const auto columns = get_le<std::uint32_t>(in);
  MemoryBrick brick(rows, columns);
  brick.item_count_ = std::bit_cast<double>(get_le<std::uint64_t>(in));
  for (float& c : brick.cells_) c = std::bit_cast<float>(get_le<std::uint32_t>(in));
  return brick;
}

void MemoryBrick::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open " + path + " for writing");
  write_snapshot(out);
}

MemoryBrick MemoryBrick::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  return read_snapshot(in);
}

std::size_t bricks_for_budget(std::size_t budget_bytes, std::size_t rows, std::size_t columns) {
  const std::size_t per_brick = brick_bytes(rows, columns);
  if (per_brick == 0) throw Error(Errc::invalid_configuration, "empty brick shape");
  return std::max<std::size_t>(1, budget_bytes / per_brick);
}

}  // namespace lego
