#include <cstdint>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "lego/error.hpp"
#include "lego/hashing.hpp"
#include "lego/streams.hpp"

namespace {

using lego::HashSeed;
using lego::ItemKey;

// Reference FNV-1a written from the published parameters, byte by byte.
std::uint64_t reference_fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Reference SplitMix64 generator (Vigna); its output is the finalizer applied
// to the golden-ratio-incremented state.
struct ReferenceSplitMix {
  std::uint64_t x;
  std::uint64_t next() {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

double chi_square_p(double statistic, double dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

std::vector<std::string> random_items(std::size_t n, std::uint64_t seed) {
  lego::StreamRng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("x" + std::to_string(rng.bits()));
  return out;
}

TEST(BaseHash, EmptyInputIsOffsetBasis) {
  EXPECT_EQ(lego::base_hash(""), 0xCBF29CE484222325ULL);
}

TEST(BaseHash, PublishedVectors) {
  EXPECT_EQ(lego::base_hash("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(lego::base_hash("foobar"), 0x85944171f73967e8ULL);
}

TEST(BaseHash, MatchesReferenceImplementation) {
  for (const std::string s : {"abc", "item_1", "a", "", "\xff\x00\x01", "longer input string"}) {
    EXPECT_EQ(lego::base_hash(s), reference_fnv1a(s)) << s;
  }
  for (const auto& s : random_items(1000, 3)) EXPECT_EQ(lego::base_hash(s), reference_fnv1a(s));
}

TEST(BaseHash, Deterministic) {
  EXPECT_EQ(lego::base_hash("a"), lego::base_hash("a"));
  static_assert(lego::base_hash("") == 0xCBF29CE484222325ULL);
}

TEST(Mix64, MatchesSplitMixReference) {
  ReferenceSplitMix ref{0};
  EXPECT_EQ(ref.next(), 0xe220a8397b1dcdafULL);
  lego::SeedSequence seq(0);
  ReferenceSplitMix again{0};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(seq.next().value, again.next());
}

TEST(HashIndex, MatchesFinalizerOracle) {
  const auto digest = reference_fnv1a("x");
  // state 0 - golden + (0 ^ digest) run through one SplitMix step
  ReferenceSplitMix ref{digest - 0x9e3779b97f4a7c15ULL};
  EXPECT_EQ(lego::hash_index(HashSeed{0}, "x", 5120), ref.next() % 5120);

  ReferenceSplitMix ref2{(0x1234ULL ^ digest) - 0x9e3779b97f4a7c15ULL};
  EXPECT_EQ(lego::hash_index(HashSeed{0x1234}, "x", 77), ref2.next() % 77);
}

TEST(HashIndex, RangeOneIsZero) {
  for (const auto& s : random_items(100, 5)) EXPECT_EQ(lego::hash_index(HashSeed{99}, s, 1), 0u);
}

TEST(HashIndex, RangeZeroRejected) {
  try {
    (void)lego::hash_index(HashSeed{1}, "a", 0);
    FAIL() << "expected an error";
  } catch (const lego::Error& e) {
    EXPECT_EQ(e.code(), lego::Errc::invalid_configuration);
  }
}

TEST(HashIndex, Deterministic) {
  EXPECT_EQ(lego::hash_index(HashSeed{7}, "item", 1000), lego::hash_index(HashSeed{7}, "item", 1000));
}

TEST(HashIndex, UniformOverBuckets) {
  constexpr std::size_t kBuckets = 256;
  std::vector<double> counts(kBuckets, 0.0);
  const auto items = random_items(100000, 11);
  for (const auto& s : items) counts[lego::hash_index(HashSeed{0xABCDEF}, s, kBuckets)] += 1.0;
  const double expected = static_cast<double>(items.size()) / kBuckets;
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  EXPECT_GT(chi_square_p(stat, kBuckets - 1), 0.001) << "chi2 = " << stat;
}

TEST(HashIndex, DistinctSeedsIndependent) {
  constexpr std::size_t kB = 8;
  double table[kB][kB] = {};
  double rows[kB] = {};
  double cols[kB] = {};
  const auto items = random_items(100000, 13);
  for (const auto& s : items) {
    const auto i = lego::hash_index(HashSeed{1}, s, kB);
    const auto j = lego::hash_index(HashSeed{2}, s, kB);
    table[i][j] += 1.0;
    rows[i] += 1.0;
    cols[j] += 1.0;
  }
  const double n = static_cast<double>(items.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < kB; ++i) {
    for (std::size_t j = 0; j < kB; ++j) {
      const double e = rows[i] * cols[j] / n;
      stat += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  EXPECT_GT(chi_square_p(stat, (kB - 1) * (kB - 1)), 0.001) << "chi2 = " << stat;
}

TEST(ItemKey, IntegerItemsAreLittleEndianBytes) {
  const std::string bytes = lego::encode_int_item(0x0102030405060708ULL);
  ASSERT_EQ(bytes.size(), 8u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 0x08);
  EXPECT_EQ(static_cast<unsigned char>(bytes[7]), 0x01);
  EXPECT_EQ(ItemKey::of_int(0x0102030405060708ULL), ItemKey::of(bytes));
  EXPECT_EQ(ItemKey::of_int(0).digest(), reference_fnv1a(std::string(8, '\0')));
}

TEST(SeedSequence, TakeMatchesRepeatedNext) {
  lego::SeedSequence a(42);
  lego::SeedSequence b(42);
  const auto seeds = a.take(6);
  for (const auto& s : seeds) EXPECT_EQ(s, b.next());
}

}  // namespace
