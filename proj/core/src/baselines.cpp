#include "lego/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "lego/error.hpp"

namespace lego {
namespace {

constexpr std::size_t kMaxDepthOnStack = 16;

std::size_t width_for(std::size_t budget_bytes, std::size_t depth) {
  if (depth == 0) throw Error(Errc::invalid_configuration, "sketch depth must be positive");
  const std::size_t width = budget_bytes / (sizeof(std::int32_t) * depth);
  if (width == 0) {
    throw Error(Errc::invalid_configuration,
                "budget of " + std::to_string(budget_bytes) + " bytes leaves no counters");
  }
  return width;
}

std::int32_t as_count(double weight) noexcept {
  return static_cast<std::int32_t>(std::llround(weight));
}

}  // namespace

CmSketch::CmSketch(std::size_t width, std::vector<HashSeed> row_seeds)
    : width_(width), seeds_(std::move(row_seeds)) {
  if (width_ == 0 || seeds_.empty()) {
    throw Error(Errc::invalid_configuration, "count-min sketch needs width and depth >= 1");
  }
  counters_.assign(width_ * seeds_.size(), 0);
}

CmSketch CmSketch::for_budget(std::size_t budget_bytes, std::uint64_t seed, std::size_t depth) {
  SeedSequence seq(seed);
  return CmSketch(width_for(budget_bytes, depth), seq.take(depth));
}

void CmSketch::store(ItemKey key, double weight) {
  const std::int32_t w = as_count(weight);
  for (std::size_t r = 0; r < seeds_.size(); ++r) {
    counters_[r * width_ + hash_index_unchecked(seeds_[r], key, width_)] += w;
  }
}

double CmSketch::query(ItemKey key) const {
  std::int32_t best = std::numeric_limits<std::int32_t>::max();
  for (std::size_t r = 0; r < seeds_.size(); ++r) {
    best = std::min(best, counters_[r * width_ + hash_index_unchecked(seeds_[r], key, width_)]);
  }
  return static_cast<double>(best);
}

CSketch::CSketch(std::size_t width, std::vector<HashSeed> row_seeds,
                 std::vector<HashSeed> sign_seeds)
    : width_(width), row_seeds_(std::move(row_seeds)), sign_seeds_(std::move(sign_seeds)) {
  if (width_ == 0 || row_seeds_.empty() || row_seeds_.size() != sign_seeds_.size()) {
    throw Error(Errc::invalid_configuration,
                "count sketch needs width >= 1 and one sign seed per row");
  }
  counters_.assign(width_ * row_seeds_.size(), 0);
}

CSketch CSketch::for_budget(std::size_t budget_bytes, std::uint64_t seed, std::size_t depth) {
  const std::size_t width = width_for(budget_bytes, depth);
  SeedSequence seq(seed);
  auto rows = seq.take(depth);
  auto signs = seq.take(depth);
  return CSketch(width, std::move(rows), std::move(signs));
}

int CSketch::sign(std::size_t row, ItemKey key) const noexcept {
  return hash_index_unchecked(sign_seeds_[row], key, 2) == 0 ? 1 : -1;
}

void CSketch::store(ItemKey key, double weight) {
  const std::int32_t w = as_count(weight);
  for (std::size_t r = 0; r < row_seeds_.size(); ++r) {
    counters_[r * width_ + hash_index_unchecked(row_seeds_[r], key, width_)] += sign(r, key) * w;
  }
}

double CSketch::query(ItemKey key) const {
  std::array<std::int64_t, kMaxDepthOnStack> local{};
  std::vector<std::int64_t> heap;
  std::int64_t* values = local.data();
  if (row_seeds_.size() > local.size()) {
    heap.resize(row_seeds_.size());
    values = heap.data();
  }
  for (std::size_t r = 0; r < row_seeds_.size(); ++r) {
    values[r] = static_cast<std::int64_t>(sign(r, key)) *
                counters_[r * width_ + hash_index_unchecked(row_seeds_[r], key, width_)];
  }
  const std::size_t mid = row_seeds_.size() / 2;
  std::nth_element(values, values + mid, values + row_seeds_.size());
  return static_cast<double>(values[mid]);
}

std::size_t heavy_buckets_for_budget(std::size_t budget_bytes) noexcept {
  return std::max<std::size_t>(1, (budget_bytes / 4) / ElasticSketch::kBucketBytes);
}

ElasticSketch::ElasticSketch(std::size_t buckets, HashSeed slot_seed, std::uint32_t lambda,
                             std::unique_ptr<FrequencySketch> light)
    : heavy_(buckets), slot_seed_(slot_seed), lambda_(lambda), light_(std::move(light)) {
  if (buckets == 0 || !light_ || lambda_ == 0) {
    throw Error(Errc::invalid_configuration,
                "elastic sketch needs buckets >= 1, lambda >= 1 and a light part");
  }
  kind_ = light_->kind() == "cm" ? "d-cms" : "d-" + std::string(light_->kind());
}

std::size_t ElasticSketch::slot_of(ItemKey key) const noexcept {
  return static_cast<std::size_t>(hash_index_unchecked(slot_seed_, key, heavy_.size()));
}

void ElasticSketch::store(ItemKey key, double weight) {
  if (weight != 1.0) {
    throw Error(Errc::unsupported_operation, "elastic sketch accepts unit inserts only");
  }
  HeavyBucket& bucket = heavy_[slot_of(key)];
  if (bucket.vote_pos == 0) {
    bucket = HeavyBucket{key.digest(), 1, 0, false};
    return;
  }
  if (bucket.key == key.digest()) {
    ++bucket.vote_pos;
    return;
  }
  ++bucket.vote_neg;
  if (static_cast<std::uint64_t>(bucket.vote_neg) >=
      static_cast<std::uint64_t>(lambda_) * bucket.vote_pos) {
    light_->store(ItemKey(bucket.key), static_cast<double>(bucket.vote_pos));
    light_weight_ += bucket.vote_pos;
    bucket = HeavyBucket{key.digest(), 1, 0, true};
    return;
  }
  light_->store(key, 1.0);
  light_weight_ += 1.0;
}

double ElasticSketch::query(ItemKey key) const {
  const HeavyBucket& bucket = heavy_[slot_of(key)];
  if (bucket.vote_pos != 0 && bucket.key == key.digest()) {
    if (!bucket.flag) return bucket.vote_pos;
    return bucket.vote_pos + light_->query(key);
  }
  return light_->query(key);
}

}  // namespace lego
