#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lego {

/// Seed selecting one member of the hash family. Fixed for the lifetime of
/// a sketch and persisted in the weight bundle.
struct HashSeed {
  std::uint64_t value = 0;

  friend constexpr bool operator==(HashSeed, HashSeed) = default;
};

inline constexpr std::uint64_t kFnvOffsetBasis = 0xCBF29CE484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;

/// FNV-1a 64-bit digest of a byte sequence.
constexpr std::uint64_t base_hash(std::string_view bytes) noexcept {
  std::uint64_t h = kFnvOffsetBasis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// An item reduced to its base digest. Every index mapping in the library
/// depends on the item only through this value, so sketches can hold and
/// replay keys without keeping the original bytes.
class ItemKey {
 public:
  constexpr ItemKey() = default;
  constexpr explicit ItemKey(std::uint64_t digest) : digest_(digest) {}

  static constexpr ItemKey of(std::string_view bytes) noexcept {
    return ItemKey(base_hash(bytes));
  }
  /// Integer items hash as their 8-byte little-endian encoding.
  static ItemKey of_int(std::uint64_t id) noexcept;

  [[nodiscard]] constexpr std::uint64_t digest() const noexcept { return digest_; }

  friend constexpr bool operator==(ItemKey, ItemKey) = default;

 private:
  std::uint64_t digest_ = kFnvOffsetBasis;
};

/// 8-byte little-endian encoding used for integer-domain items.
std::string encode_int_item(std::uint64_t id);

/// mix(seed ^ digest) mod range. Throws Errc::invalid_configuration when
/// range is zero.
std::uint64_t hash_index(HashSeed seed, ItemKey key, std::uint64_t range);
std::uint64_t hash_index(HashSeed seed, std::string_view item, std::uint64_t range);

/// Unchecked variant for hot paths; range must be positive.
constexpr std::uint64_t hash_index_unchecked(HashSeed seed, ItemKey key,
                                             std::uint64_t range) noexcept {
  return mix64(seed.value ^ key.digest()) % range;
}

/// Deterministic seed stream (SplitMix64 generator) used to derive the
/// per-row seeds of every structure from one master seed.
class SeedSequence {
 public:
  explicit SeedSequence(std::uint64_t master) : state_(master) {}

  HashSeed next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return HashSeed{mix64(state_)};
  }

  std::vector<HashSeed> take(std::size_t count);

 private:
  std::uint64_t state_;
};

}  // namespace lego
