#include "lego/hashing.hpp"

#include "lego/error.hpp"

namespace lego {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_configuration: return "invalid-configuration";
    case Errc::invalid_merge: return "invalid-merge";
    case Errc::malformed_bundle: return "malformed-bundle";
    case Errc::invalid_scan_input: return "invalid-scan-input";
    case Errc::scanner_unavailable: return "scanner-unavailable";
    case Errc::unsupported_operation: return "unsupported-operation";
    case Errc::truncation_too_small: return "truncation-too-small";
    case Errc::missing_estimate: return "missing-estimate";
    case Errc::io_error: return "io-error";
    case Errc::invalid_utf8: return "invalid-utf8";
  }
  return "unknown";
}

std::string encode_int_item(std::uint64_t id) {
  std::string out(8, '\0');
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<char>((id >> (8 * i)) & 0xFF);
  }
  return out;
}

ItemKey ItemKey::of_int(std::uint64_t id) noexcept {
  std::uint64_t h = kFnvOffsetBasis;
  for (int i = 0; i < 8; ++i) {
    h ^= (id >> (8 * i)) & 0xFF;
    h *= kFnvPrime;
  }
  return ItemKey(h);
}

std::uint64_t hash_index(HashSeed seed, ItemKey key, std::uint64_t range) {
  if (range == 0) {
    throw Error(Errc::invalid_configuration, "hash range must be at least 1");
  }
  return hash_index_unchecked(seed, key, range);
}

std::uint64_t hash_index(HashSeed seed, std::string_view item, std::uint64_t range) {
  return hash_index(seed, ItemKey::of(item), range);
}

std::vector<HashSeed> SeedSequence::take(std::size_t count) {
  std::vector<HashSeed> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(next());
  return out;
}

}  // namespace lego
