#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "lego/error.hpp"
#include "lego/memory.hpp"
#include "lego/streams.hpp"
#include "test_support.hpp"

namespace {

using lego::AddressVector;
using lego::EmbeddingVector;
using lego::MemoryBrick;

struct Update {
  EmbeddingVector v;
  AddressVector a;
  double w;
};

std::vector<Update> random_updates(std::size_t n, std::size_t rows, std::size_t cols,
                                   std::uint64_t seed, bool signed_weights = false) {
  lego::StreamRng rng(seed);
  std::vector<Update> out;
  for (std::size_t i = 0; i < n; ++i) {
    Update u{EmbeddingVector(rows), AddressVector(rows), 1.0};
    double total = 0.0;
    for (std::size_t k = 0; k < rows; ++k) {
      u.v[k] = rng.uniform(0.001, 1.0);
      total += u.v[k];
      u.a[k] = static_cast<std::uint32_t>(rng.below(cols));
    }
    for (std::size_t k = 0; k < rows; ++k) u.v[k] /= total;
    if (signed_weights) u.w = rng.uniform() < 0.2 ? -1.0 : static_cast<double>(rng.between(1, 3));
    out.push_back(u);
  }
  return out;
}

std::vector<double> dense_sum(const std::vector<Update>& updates, std::size_t rows,
                              std::size_t cols) {
  std::vector<double> m(rows * cols, 0.0);
  for (const auto& u : updates) {
    for (std::size_t k = 0; k < rows; ++k) m[k * cols + u.a[k]] += u.w * u.v[k];
  }
  return m;
}

TEST(MemoryBrick, StartsEmpty) {
  MemoryBrick b;
  EXPECT_EQ(b.rows(), 5u);
  EXPECT_EQ(b.columns(), 5120u);
  EXPECT_EQ(b.item_count(), 0.0);
  EXPECT_TRUE(std::all_of(b.cells().begin(), b.cells().end(), [](float x) { return x == 0.0f; }));
  const auto r = b.read(AddressVector{0, 1, 2, 3, 4});
  for (double m : r.m) EXPECT_EQ(m, 0.0);
  EXPECT_EQ(r.count, 0.0);
}

TEST(MemoryBrick, FootprintIs100KB) {
  EXPECT_EQ(MemoryBrick().footprint_bytes(), 102400u);
  EXPECT_EQ(lego::brick_bytes(5, 5120), 102400u);
}

TEST(MemoryBrick, SingleStoreAndReadBack) {
  MemoryBrick b(2, 10);
  b.store(EmbeddingVector{0.25, 0.75}, AddressVector{3, 7});
  EXPECT_EQ(b.cell(0, 3), 0.25f);
  EXPECT_EQ(b.cell(1, 7), 0.75f);
  EXPECT_EQ(b.item_count(), 1.0);
  const auto r = b.read(AddressVector{3, 7});
  EXPECT_EQ(r.m[0], 0.25);
  EXPECT_EQ(r.m[1], 0.75);
  EXPECT_EQ(r.count, 1.0);
  const auto disjoint = b.read(AddressVector{4, 8});
  EXPECT_EQ(disjoint.m[0], 0.0);
  EXPECT_EQ(disjoint.m[1], 0.0);
  EXPECT_EQ(disjoint.count, 1.0);
}

TEST(MemoryBrick, DeletionCancels) {
  MemoryBrick b(2, 10);
  b.store(EmbeddingVector{0.25, 0.75}, AddressVector{3, 7});
  b.store(EmbeddingVector{0.25, 0.75}, AddressVector{3, 7}, -1.0);
  EXPECT_EQ(b, MemoryBrick(2, 10));
  EXPECT_EQ(b.item_count(), 0.0);
}

TEST(MemoryBrick, DeletionCancelsForArbitraryVectors) {
  for (const auto& u : random_updates(500, 5, 64, 21)) {
    MemoryBrick b(5, 64);
    b.store(u.v, u.a, 3.0);
    b.store(u.v, u.a, -3.0);
    EXPECT_EQ(b, MemoryBrick(5, 64));
  }
}

TEST(MemoryBrick, TinyContributionStillRaisesCell) {
  MemoryBrick b(1, 1);
  b.store(EmbeddingVector{1.0}, AddressVector{0}, 16384.0);
  b.store(EmbeddingVector{1.0}, AddressVector{0}, 1e-9);
  EXPECT_GT(b.cell(0, 0), 16384.0f);
}

TEST(MemoryBrick, MatchesDenseAccumulation) {
  const auto updates = random_updates(1000, 5, 64, 3, true);
  MemoryBrick b(5, 64);
  double weights = 0.0;
  for (const auto& u : updates) {
    b.store(u.v, u.a, u.w);
    weights += u.w;
  }
  const auto oracle = dense_sum(updates, 5, 64);
  for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(b.cells()[i], oracle[i], 1e-4);
  EXPECT_EQ(b.item_count(), weights);
}

TEST(MemoryBrick, CellsNeverFallBelowExactSum) {
  // Many unit stores of one vector: round-to-nearest would drift.
  MemoryBrick b(5, 8);
  const EmbeddingVector v{0.1, 0.2, 0.3, 0.15, 0.25};
  const AddressVector a{0, 1, 2, 3, 4};
  for (int i = 0; i < 200000; ++i) b.store(v, a);
  const auto r = b.read(a);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_GE(r.m[k], 200000.0 * v[k]);
}

TEST(MemoryBrick, OrderIndependent) {
  auto updates = random_updates(2000, 5, 32, 4);
  MemoryBrick forward(5, 32);
  for (const auto& u : updates) forward.store(u.v, u.a, u.w);
  lego::StreamRng rng(99);
  rng.shuffle(updates);
  MemoryBrick shuffled(5, 32);
  for (const auto& u : updates) shuffled.store(u.v, u.a, u.w);
  for (std::size_t i = 0; i < forward.cells().size(); ++i) {
    EXPECT_NEAR(forward.cells()[i], shuffled.cells()[i], 1e-4);
  }
}

TEST(MemoryBrick, MergeIdentityAndLinearity) {
  const auto s1 = random_updates(500, 5, 40, 5);
  const auto s2 = random_updates(700, 5, 40, 6);
  MemoryBrick a(5, 40), b(5, 40), joint(5, 40);
  for (const auto& u : s1) a.store(u.v, u.a, u.w), joint.store(u.v, u.a, u.w);
  for (const auto& u : s2) b.store(u.v, u.a, u.w), joint.store(u.v, u.a, u.w);

  MemoryBrick empty(5, 40);
  MemoryBrick copy = empty;
  copy.merge(a);
  EXPECT_EQ(copy, a);
  MemoryBrick same = a;
  same.merge(empty);
  EXPECT_EQ(same, a);

  a.merge(b);
  EXPECT_EQ(a.item_count(), joint.item_count());
  for (std::size_t i = 0; i < joint.cells().size(); ++i) {
    EXPECT_NEAR(a.cells()[i], joint.cells()[i], 1e-4);
  }
}

TEST(MemoryBrick, MergeShapeMismatch) {
  MemoryBrick a(5, 40);
  try {
    a.merge(MemoryBrick(5, 41));
    FAIL();
  } catch (const lego::Error& e) {
    EXPECT_EQ(e.code(), lego::Errc::invalid_merge);
  }
}

TEST(MemoryBrick, InvalidShape) {
  EXPECT_THROW(MemoryBrick(0, 10), lego::Error);
  EXPECT_THROW(MemoryBrick(5, 0), lego::Error);
  EXPECT_THROW(MemoryBrick(lego::kMaxRows + 1, 4), lego::Error);
}

TEST(MemoryBrick, SnapshotRoundTrip) {
  MemoryBrick b(3, 16);
  for (const auto& u : random_updates(100, 3, 16, 8, true)) b.store(u.v, u.a, u.w);
  std::stringstream buf;
  b.write_snapshot(buf);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 8u + 4 + 4 + 8 + 3 * 16 * 4);
  EXPECT_EQ(bytes.substr(0, 8), "LEGOBRK1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 16);
  std::stringstream in(bytes);
  EXPECT_EQ(MemoryBrick::read_snapshot(in), b);

  lego::test::TempDir dir;
  b.save(dir.file("b.bin"));
  EXPECT_EQ(MemoryBrick::load(dir.file("b.bin")), b);
}

TEST(MemoryBrick, SnapshotRejectsGarbage) {
  std::stringstream bad_magic("NOTABRICK...........");
  EXPECT_THROW(MemoryBrick::read_snapshot(bad_magic), lego::Error);
  MemoryBrick b(2, 4);
  std::stringstream buf;
  b.write_snapshot(buf);
  std::stringstream truncated(buf.str().substr(0, buf.str().size() - 3));
  EXPECT_THROW(MemoryBrick::read_snapshot(truncated), lego::Error);
  EXPECT_THROW(MemoryBrick::load("/nonexistent/brick.bin"), lego::Error);
}

TEST(BricksForBudget, FloorsToWholeBricks) {
  EXPECT_EQ(lego::bricks_for_budget(102400, 5, 5120), 1u);
  EXPECT_EQ(lego::bricks_for_budget(204799, 5, 5120), 1u);
  EXPECT_EQ(lego::bricks_for_budget(204800, 5, 5120), 2u);
  EXPECT_EQ(lego::bricks_for_budget(1000, 5, 5120), 1u);
  EXPECT_EQ(lego::bricks_for_budget(1024 * 1024, 5, 5120), 10u);
}

}  // namespace
