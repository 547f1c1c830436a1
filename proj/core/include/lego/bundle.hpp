#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lego/embedding.hpp"
#include "lego/hashing.hpp"
#include "lego/nn.hpp"

namespace lego {

struct BundleSeeds {
  std::vector<HashSeed> embed;
  std::vector<HashSeed> address;
  HashSeed brick;

  friend bool operator==(const BundleSeeds&, const BundleSeeds&) = default;
};

struct BundleFlags {
  bool no_scanner = false;
  bool no_normalization = false;

  friend bool operator==(const BundleFlags&, const BundleFlags&) = default;
};

/// Everything the engine needs to reproduce a trained (or untrained) Lego
/// sketch: structure, seeds, the embedding table and the scan/decode
/// networks. The networks may be absent, in which case only rule-based
/// decoding is available.
///
/// On disk this is a UTF-8 JSON object whose keys match the field names.
struct WeightBundle {
  static constexpr int kFormatVersion = 1;
  static constexpr std::size_t kNetworkDepth = 8;
  static constexpr std::size_t kMaxHiddenWidth = 32;

  int format_version = kFormatVersion;
  std::size_t d1 = 5;
  std::size_t d2 = 5120;
  std::size_t v_dim = EmbeddingTable::kDefaultDim;
  double clamp_epsilon = EmbeddingTable::kDefaultClampEpsilon;
  std::size_t s_dim = 8;
  double beta = 10000.0;
  std::array<double, 2> alpha_interval = {0.5, 1.0};
  std::size_t scan_subset_columns = 512;
  double leaky_slope = nn::kDefaultLeakySlope;
  std::vector<double> embedding_values;
  BundleSeeds seeds;
  nn::LayerStack scan_phi;
  nn::LayerStack scan_rho;
  nn::LayerStack dec;
  BundleFlags flags;

  /// Untrained bundle: default shape, linear-spread table and seeds drawn
  /// from `master_seed`. Carries no networks.
  static WeightBundle untrained(std::uint64_t master_seed = 42, std::size_t d1 = 5,
                                std::size_t d2 = 5120);

  [[nodiscard]] bool has_networks() const noexcept {
    return !scan_phi.empty() || !scan_rho.empty() || !dec.empty();
  }

  /// Throws Errc::malformed_bundle naming the first violated invariant.
  void validate() const;

  [[nodiscard]] EmbeddingTable make_table() const;

  /// Digest over the fields that decide where and how items are stored
  /// (shape, seeds, table). Two sketches can merge only if these agree.
  [[nodiscard]] std::uint64_t layout_fingerprint() const;

  friend bool operator==(const WeightBundle&, const WeightBundle&) = default;
};

/// ceil(d2 / 10), the default scan subset width.
constexpr std::size_t default_scan_columns(std::size_t d2) noexcept { return (d2 + 9) / 10; }

std::string bundle_to_json(const WeightBundle& bundle);
/// Parses and validates. Throws Errc::malformed_bundle.
WeightBundle bundle_from_json(const std::string& text);

void save_bundle(const WeightBundle& bundle, const std::string& path);
/// Throws Errc::io_error if unreadable, Errc::malformed_bundle if invalid.
WeightBundle load_bundle(const std::string& path);

}  // namespace lego
