#include "lego/lego_sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "lego/error.hpp"

namespace lego {

struct LegoSketch::ScanCache {
  std::mutex mutex;
  std::vector<std::optional<StreamCharacteristics>> entries;
};

namespace {

std::shared_ptr<const WeightBundle> checked(std::shared_ptr<const WeightBundle> bundle) {
  if (!bundle) throw Error(Errc::invalid_configuration, "Lego sketch needs a weight bundle");
  bundle->validate();
  return bundle;
}

}  // namespace

double rule_estimate(std::span<const double> m, std::span<const double> v) noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m.size(); ++k) best = std::min(best, m[k] / v[k]);
  return m.empty() ? 0.0 : best;
}

double decode_output(double y) noexcept {
  // exp overflows past ~709.78
  return std::max(0.0, std::expm1(std::min(y, 700.0)));
}

LegoSketch::LegoSketch(std::shared_ptr<const WeightBundle> bundle, std::size_t bricks,
                       DecodeMode mode)
    : bundle_(checked(std::move(bundle))),
      table_(bundle_->make_table()),
      mode_(mode),
      cache_(std::make_unique<ScanCache>()) {
  if (bricks == 0) throw Error(Errc::invalid_configuration, "brick count must be at least 1");
  if (mode_ == DecodeMode::ensemble && !bundle_->has_networks()) {
    throw Error(Errc::invalid_configuration,
                "ensemble decoding needs a bundle with scan and decode networks");
  }
  bricks_.assign(bricks, MemoryBrick(bundle_->d1, bundle_->d2));
  cache_->entries.resize(bricks);
}

LegoSketch LegoSketch::for_budget(std::shared_ptr<const WeightBundle> bundle,
                                  std::size_t budget_bytes, DecodeMode mode) {
  if (!bundle) throw Error(Errc::invalid_configuration, "Lego sketch needs a weight bundle");
  const std::size_t k = bricks_for_budget(budget_bytes, bundle->d1, bundle->d2);
  return LegoSketch(std::move(bundle), k, mode);
}

LegoSketch::LegoSketch(LegoSketch&&) noexcept = default;
LegoSketch& LegoSketch::operator=(LegoSketch&&) noexcept = default;
LegoSketch::~LegoSketch() = default;

AddressVector LegoSketch::address(ItemKey key) const noexcept {
  const auto& seeds = bundle_->seeds.address;
  AddressVector a(seeds.size());
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    a[k] = static_cast<std::uint32_t>(hash_index_unchecked(seeds[k], key, bundle_->d2));
  }
  return a;
}

std::size_t LegoSketch::brick_of(ItemKey key) const noexcept {
  return static_cast<std::size_t>(hash_index_unchecked(bundle_->seeds.brick, key, bricks_.size()));
}

void LegoSketch::store(ItemKey key, double weight) {
  const std::size_t b = brick_of(key);
  bricks_[b].store(table_.embed(key), address(key), weight);
  if (mode_ == DecodeMode::ensemble) invalidate(b);
}

void LegoSketch::invalidate(std::size_t brick_index) {
  std::lock_guard lock(cache_->mutex);
  cache_->entries[brick_index].reset();
}

StreamCharacteristics LegoSketch::scan_uncached(std::size_t brick_index) const {
  const WeightBundle& b = *bundle_;
  const MemoryBrick& brick = bricks_.at(brick_index);
  const std::size_t columns = b.scan_subset_columns;
  std::vector<double> elements(columns * b.d1);
  for (std::size_t c = 0; c < columns; ++c) {
    for (std::size_t k = 0; k < b.d1; ++k) elements[c * b.d1 + k] = brick.cell(k, c);
  }
  const double extra = std::log1p(std::max(brick.item_count(), 0.0));
  StreamCharacteristics out;
  out.s = nn::forward_deepsets(b.scan_phi, b.scan_rho, elements, b.d1, extra, b.leaky_slope);
  out.s_n = std::expm1(out.s[0]);
  out.s_alpha = out.s[1];
  return out;
}

StreamCharacteristics LegoSketch::scan(std::size_t brick_index) const {
  if (mode_ != DecodeMode::ensemble) {
    throw Error(Errc::scanner_unavailable, "scan requires ensemble mode");
  }
  if (brick_index >= bricks_.size()) {
    throw Error(Errc::invalid_configuration, "brick index out of range");
  }
  return cached_scan(brick_index);
}

StreamCharacteristics LegoSketch::cached_scan(std::size_t brick_index) const {
  {
    std::lock_guard lock(cache_->mutex);
    if (const auto& hit = cache_->entries[brick_index]) return *hit;
  }
  StreamCharacteristics fresh = scan_uncached(brick_index);
  std::lock_guard lock(cache_->mutex);
  cache_->entries[brick_index] = fresh;
  return fresh;
}

QueryTrace LegoSketch::trace(ItemKey key) const {
  QueryTrace t;
  t.brick = brick_of(key);
  t.v = table_.embed(key);
  t.a = address(key);
  t.read = bricks_[t.brick].read(t.a);
  t.rule_raw = rule_estimate(t.read.m.span(), t.v.span());
  t.rule = std::max(0.0, t.rule_raw);
  t.estimate = t.rule;
  if (mode_ == DecodeMode::rule_only) return t;

  const WeightBundle& b = *bundle_;
  const bool scanner = !b.flags.no_scanner;
  if (scanner) t.characteristics = cached_scan(t.brick);

  std::vector<double> input;
  input.reserve(2 * b.d1 + 1 + b.s_dim);
  input.insert(input.end(), t.read.m.begin(), t.read.m.end());
  input.insert(input.end(), t.v.begin(), t.v.end());
  input.push_back(std::log1p(std::max(t.read.count, 0.0)));
  if (scanner) {
    input.insert(input.end(), t.characteristics->s.begin(), t.characteristics->s.end());
  } else {
    input.resize(input.size() + b.s_dim, 0.0);
  }
  const double y = nn::forward_mlp(b.dec, input, b.leaky_slope).front();
  t.neural = decode_output(y);

  bool prefer_rule = !std::isfinite(*t.neural);
  if (scanner) {
    const auto& c = *t.characteristics;
    const bool alpha_inside =
        c.s_alpha >= b.alpha_interval[0] && c.s_alpha <= b.alpha_interval[1];
    // NaN characteristics fail both tests and fall back to the rule path.
    prefer_rule = prefer_rule || !alpha_inside || !(c.s_n > b.beta);
  }
  t.used_neural = !prefer_rule;
  t.estimate = t.used_neural ? *t.neural : t.rule;
  return t;
}

double LegoSketch::query(ItemKey key) const {
  if (mode_ == DecodeMode::rule_only) {
    const std::size_t b = brick_of(key);
    const BrickRead read = bricks_[b].read(address(key));
    const EmbeddingVector v = table_.embed(key);
    return std::max(0.0, rule_estimate(read.m.span(), v.span()));
  }
  return trace(key).estimate;
}

void LegoSketch::merge(const LegoSketch& other) {
  if (other.bricks_.size() != bricks_.size()) {
    throw Error(Errc::invalid_merge, "Lego sketches have different brick counts");
  }
  if (other.bundle_->layout_fingerprint() != bundle_->layout_fingerprint()) {
    throw Error(Errc::invalid_merge, "Lego sketches use different seeds or shapes");
  }
  for (std::size_t i = 0; i < bricks_.size(); ++i) {
    bricks_[i].merge(other.bricks_[i]);
    if (mode_ == DecodeMode::ensemble) invalidate(i);
  }
}

std::size_t LegoSketch::memory_bytes() const noexcept {
  return bricks_.size() * brick_bytes(bundle_->d1, bundle_->d2);
}

}  // namespace lego
