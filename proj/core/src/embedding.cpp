#include "lego/embedding.hpp"

#include <algorithm>
#include <sstream>

#include "lego/error.hpp"

namespace lego {

EmbeddingTable::EmbeddingTable(std::vector<double> values, std::vector<HashSeed> seeds,
                               double clamp_epsilon)
    : values_(std::move(values)), seeds_(std::move(seeds)), clamp_epsilon_(clamp_epsilon) {
  if (!(clamp_epsilon_ > 0.0 && clamp_epsilon_ <= 1.0)) {
    throw Error(Errc::invalid_configuration, "clamp_epsilon must lie in (0, 1]");
  }
  if (values_.empty()) {
    throw Error(Errc::invalid_configuration, "embedding table must not be empty");
  }
  if (seeds_.empty() || seeds_.size() > kMaxRows) {
    std::ostringstream msg;
    msg << "embedding needs between 1 and " << kMaxRows << " hash seeds, got "
        << seeds_.size();
    throw Error(Errc::invalid_configuration, msg.str());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= clamp_epsilon_ && values_[i] <= 1.0)) {
      std::ostringstream msg;
      msg << "embedding value " << i << " = " << values_[i] << " outside ["
          << clamp_epsilon_ << ", 1]";
      throw Error(Errc::invalid_configuration, msg.str());
    }
  }
}

EmbeddingTable EmbeddingTable::linear_spread(std::size_t v_dim, std::vector<HashSeed> seeds,
                                             double clamp_epsilon) {
  std::vector<double> values(v_dim);
  for (std::size_t i = 0; i < v_dim; ++i) {
    values[i] = clamp_epsilon + (1.0 - clamp_epsilon) * (static_cast<double>(i) + 0.5) /
                                    static_cast<double>(v_dim);
  }
  return EmbeddingTable(std::move(values), std::move(seeds), clamp_epsilon);
}

EmbeddingVector EmbeddingTable::lookup(ItemKey key) const noexcept {
  EmbeddingVector raw(seeds_.size());
  const auto dim = static_cast<std::uint64_t>(values_.size());
  for (std::size_t k = 0; k < seeds_.size(); ++k) {
    raw[k] = values_[hash_index_unchecked(seeds_[k], key, dim)];
  }
  return raw;
}

EmbeddingVector EmbeddingTable::embed(ItemKey key) const noexcept {
  EmbeddingVector v = lookup(key);
  double total = 0.0;
  for (double x : v) total += x;
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = static_cast<float>(normalize_ ? v[k] / total : v[k]);
  }
  return v;
}

void EmbeddingTable::assign_clamped(std::span<const double> values) {
  if (frozen_) {
    throw Error(Errc::unsupported_operation, "embedding table is frozen (fixed V)");
  }
  if (values.size() != values_.size()) {
    throw Error(Errc::invalid_configuration, "embedding update has the wrong dimension");
  }
  std::transform(values.begin(), values.end(), values_.begin(),
                 [eps = clamp_epsilon_](double x) { return std::clamp(x, eps, 1.0); });
}

}  // namespace lego
