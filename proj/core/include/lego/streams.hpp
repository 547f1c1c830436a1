#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lego {

/// Zipf(alpha) stream over n ranked items, N draws.
struct ZipfSpec {
  std::uint64_t n = 1;
  double alpha = 1.0;
  std::uint64_t length = 1;
  std::uint64_t seed = 42;
};

/// Deterministic generator for everything in this module. mt19937_64 output
/// is fixed by the standard; the distributions below are implemented here
/// rather than taken from <random>, whose algorithms vary by vendor.
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Uniform integer in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) noexcept {
    return lo + below(hi - lo + 1);
  }
  std::uint64_t bits() noexcept { return engine_(); }

  template <typename T>
  void shuffle(std::vector<T>& values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// p_i = C / i^alpha for ranks 1..n with C normalizing the sum to 1.
std::vector<double> zipf_probs(std::uint64_t n, double alpha);

/// "item_{rank}", rank counted from 1.
std::string rank_item(std::uint64_t rank);

enum class SamplingMode {
  iid,          // N independent categorical draws
  exact_quota,  // largest-remainder rounding of N * p_i, then shuffled
};

std::vector<std::string> gen_stream(const ZipfSpec& spec, SamplingMode mode = SamplingMode::iid);

/// Exact multiset counts, kept in first-seen order.
class FrequencyTable {
 public:
  void add(std::string_view item, std::uint64_t count = 1);

  [[nodiscard]] std::uint64_t count(std::string_view item) const;
  [[nodiscard]] bool contains(std::string_view item) const;
  [[nodiscard]] std::size_t distinct() const noexcept { return entries_.size(); }
  [[nodiscard]] std::uint64_t total() const noexcept { return total_; }
  [[nodiscard]] const std::vector<std::pair<std::string, std::uint64_t>>& entries() const noexcept {
    return entries_;
  }

  /// CSV with header "item,count".
  void save_csv(const std::string& path) const;
  static FrequencyTable load_csv(const std::string& path);

 private:
  std::vector<std::pair<std::string, std::uint64_t>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t total_ = 0;
};

FrequencyTable exact_count(std::span<const std::string> stream);

struct MetaTask {
  std::vector<std::string> support;
  std::vector<std::pair<std::string, std::uint64_t>> query;
  ZipfSpec spec;
};

struct MetaTaskRanges {
  std::array<std::uint64_t, 2> n_range = {1000, 50000};
  std::array<double, 2> alpha_range = {0.5, 1.0};
  std::array<double, 2> length_multiplier_range = {1.0, 10.0};
};

/// Smallest N at which the rarest rank's expected count reaches 1:
/// ceil(n^alpha / C).
std::uint64_t min_stream_length(std::uint64_t n, double alpha);

MetaTask gen_meta_task(const MetaTaskRanges& ranges, std::uint64_t seed);

/// Newline-delimited UTF-8 tokens; blank lines are skipped and a trailing
/// '\r' is dropped. Throws Errc::io_error or Errc::invalid_utf8 (with the
/// 1-based line number).
std::vector<std::string> ingest(const std::string& path);
void write_stream(const std::string& path, std::span<const std::string> items);

bool is_valid_utf8(std::string_view bytes) noexcept;

/// RFC 4180 quoting for a single field.
std::string csv_escape(std::string_view field);
/// Splits one CSV record. Throws Errc::io_error on an unterminated quote.
std::vector<std::string> csv_split(std::string_view line);

}  // namespace lego
