#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "lego/baselines.hpp"
#include "lego/bundle.hpp"
#include "lego/error.hpp"
#include "lego/lego_sketch.hpp"
#include "lego/sketch.hpp"
#include "lego/streams.hpp"

namespace {

using lego::CmSketch;
using lego::CSketch;
using lego::ElasticSketch;
using lego::HashSeed;
using lego::ItemKey;

std::vector<HashSeed> seeds(std::size_t n, std::uint64_t master) {
  return lego::SeedSequence(master).take(n);
}

TEST(CmSketch, SingleItemExact) {
  CmSketch cm(16, seeds(3, 1));
  for (int i = 0; i < 5; ++i) cm.store("only");
  EXPECT_EQ(cm.query("only"), 5.0);
}

TEST(CmSketch, BudgetSizing) {
  const auto cm = CmSketch::for_budget(1200, 42);
  EXPECT_EQ(cm.depth(), 3u);
  EXPECT_EQ(cm.width(), 100u);
  EXPECT_EQ(cm.memory_bytes(), 1200u);
  EXPECT_THROW(CmSketch::for_budget(11, 42), lego::Error);
}

TEST(CmSketch, MatchesDenseReplayAndOverestimates) {
  const auto row_seeds = seeds(3, 5);
  CmSketch cm(8, row_seeds);
  std::vector<std::vector<long>> dense(3, std::vector<long>(8, 0));
  const auto items = lego::gen_stream({100, 1.0, 2000, 3});
  for (const auto& item : items) {
    cm.store(item);
    for (std::size_t r = 0; r < 3; ++r) ++dense[r][lego::hash_index(row_seeds[r], item, 8)];
  }
  const auto truth = lego::exact_count(items);
  for (const auto& [item, f] : truth.entries()) {
    long best = dense[0][lego::hash_index(row_seeds[0], item, 8)];
    for (std::size_t r = 1; r < 3; ++r) best = std::min(best, dense[r][lego::hash_index(row_seeds[r], item, 8)]);
    EXPECT_EQ(cm.query(item), static_cast<double>(best));
    EXPECT_GE(cm.query(item), static_cast<double>(f));
  }
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(cm.counter(r, c), dense[r][c]);
  }
}

TEST(CmSketch, RoundsWeights) {
  CmSketch cm(16, seeds(3, 1));
  cm.store("w", 2.6);
  cm.store("w", -0.4);
  EXPECT_EQ(cm.query("w"), 3.0);
}

TEST(CSketch, SingleItemExact) {
  auto cs = CSketch::for_budget(4 * 3 * 16, 9);
  for (int i = 0; i < 5; ++i) cs.store("only");
  EXPECT_EQ(cs.query("only"), 5.0);
}

TEST(CSketch, SignsArePlusMinusOne) {
  const auto cs = CSketch::for_budget(1200, 3);
  int plus = 0;
  for (int i = 0; i < 2000; ++i) {
    const int s = cs.sign(0, ItemKey::of_int(i));
    ASSERT_TRUE(s == 1 || s == -1);
    plus += s == 1;
  }
  EXPECT_NEAR(plus, 1000, 150);
}

TEST(CSketch, MatchesDenseSignedReplay) {
  const auto rows = seeds(3, 21);
  const auto signs = seeds(3, 22);
  CSketch cs(8, rows, signs);
  std::vector<std::vector<long>> dense(3, std::vector<long>(8, 0));
  auto sign = [&](std::size_t r, const std::string& item) {
    return lego::hash_index(signs[r], item, 2) == 0 ? 1L : -1L;
  };
  const auto items = lego::gen_stream({100, 0.9, 2000, 4});
  for (const auto& item : items) {
    cs.store(item);
    for (std::size_t r = 0; r < 3; ++r) dense[r][lego::hash_index(rows[r], item, 8)] += sign(r, item);
  }
  const auto counts = lego::exact_count(items);
  for (const auto& [item, f] : counts.entries()) {
    std::vector<long> v;
    for (std::size_t r = 0; r < 3; ++r) v.push_back(sign(r, item) * dense[r][lego::hash_index(rows[r], item, 8)]);
    std::sort(v.begin(), v.end());
    EXPECT_EQ(cs.query(item), static_cast<double>(v[1]));
  }
}

TEST(CSketch, EvenDepthTakesUpperMiddle) {
  CSketch cs(1, seeds(4, 1), seeds(4, 2));
  // With one column per row every row holds the signed total; querying the
  // single stored item reads its own count back in every row.
  cs.store("a", 3.0);
  EXPECT_EQ(cs.query("a"), 3.0);
}

TEST(CSketch, UnbiasedOverSeeds) {
  const auto items = lego::gen_stream({200, 0.8, 3000, 5});
  const auto truth = lego::exact_count(items);
  const std::string target = "item_10";
  const double f = static_cast<double>(truth.count(target));
  std::vector<double> errors;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto cs = CSketch::for_budget(4 * 3 * 32, 1000 + s);
    for (const auto& item : items) cs.store(item);
    errors.push_back(cs.query(target) - f);
  }
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= errors.size();
  double var = 0.0;
  for (double e : errors) var += (e - mean) * (e - mean);
  const double se = std::sqrt(var / (errors.size() - 1) / errors.size());
  EXPECT_LE(std::abs(mean), 3.0 * se) << "mean " << mean << " se " << se;
}

std::unique_ptr<lego::FrequencySketch> light_cm(std::size_t width = 64) {
  return std::make_unique<CmSketch>(width, seeds(3, 77));
}

TEST(Elastic, LoneOccupantIsExact) {
  ElasticSketch e(16, HashSeed{5}, 8, light_cm());
  for (int i = 0; i < 1000; ++i) e.store("hot");
  EXPECT_EQ(e.query("hot"), 1000.0);
  EXPECT_EQ(e.light_weight(), 0.0);
  const auto& light = dynamic_cast<const CmSketch&>(e.light());
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 64; ++c) EXPECT_EQ(light.counter(r, c), 0);
  }
}

TEST(Elastic, NonResidentPassesThrough) {
  ElasticSketch e(1, HashSeed{5}, 8, light_cm());
  e.store("first");
  for (int i = 0; i < 3; ++i) e.store("second");
  EXPECT_EQ(e.query("second"), e.light().query("second"));
}

// Two items contending for one slot, replayed by hand.
TEST(Elastic, ScriptedContention) {
  ElasticSketch e(1, HashSeed{5}, 8, light_cm(4096));
  // A arrives twice: slot (A, 2, 0, false).
  e.store("A");
  e.store("A");
  // B arrives 15 times: vote_neg climbs to 15 < 16, each B goes to light.
  for (int i = 0; i < 15; ++i) e.store("B");
  EXPECT_EQ(e.heavy()[0].vote_pos, 2u);
  EXPECT_EQ(e.heavy()[0].vote_neg, 15u);
  EXPECT_EQ(e.light_weight(), 15.0);
  EXPECT_EQ(e.query("A"), 2.0);
  // 16th B: 16 >= 8 * 2, so A (2) is flushed to light and B takes the slot.
  e.store("B");
  EXPECT_EQ(e.heavy()[0], (lego::HeavyBucket{ItemKey::of("B").digest(), 1, 0, true}));
  EXPECT_EQ(e.light_weight(), 17.0);
  // B: 1 in heavy + 15 in light. A: 2 in light.
  EXPECT_EQ(e.query("B"), 16.0);
  EXPECT_EQ(e.query("A"), 2.0);
  // A returns 8 times: 8 >= 8 * 1 evicts B on the 8th; the first 7 go to light.
  for (int i = 0; i < 8; ++i) e.store("A");
  EXPECT_EQ(e.heavy()[0], (lego::HeavyBucket{ItemKey::of("A").digest(), 1, 0, true}));
  EXPECT_EQ(e.light_weight(), 17.0 + 7.0 + 1.0);
  EXPECT_EQ(e.query("A"), 1.0 + 2.0 + 7.0);
  EXPECT_EQ(e.query("B"), 16.0);
}

TEST(Elastic, ConservesInserts) {
  ElasticSketch e(32, HashSeed{9}, 8, light_cm(1 << 12));
  const auto items = lego::gen_stream({500, 1.0, 20000, 8});
  for (const auto& i : items) e.store(i);
  double heavy = 0.0;
  for (const auto& b : e.heavy()) heavy += b.vote_pos;
  EXPECT_EQ(heavy + e.light_weight(), static_cast<double>(items.size()));
}

TEST(Elastic, RejectsNonUnitWeights) {
  ElasticSketch e(4, HashSeed{1}, 8, light_cm());
  try {
    e.store("x", -1.0);
    FAIL();
  } catch (const lego::Error& err) {
    EXPECT_EQ(err.code(), lego::Errc::unsupported_operation);
  }
  EXPECT_THROW(e.store("x", 2.0), lego::Error);
}

TEST(Factory, BuildsEveryKind) {
  for (auto kind : {lego::SketchKind::cm, lego::SketchKind::cs, lego::SketchKind::lego,
                    lego::SketchKind::d_cms, lego::SketchKind::d_lego}) {
    auto s = lego::make_sketch(kind, 300 * 1024);
    EXPECT_EQ(s->kind(), lego::to_string(kind));
    EXPECT_LE(s->memory_bytes(), 300u * 1024);
    s->store("x");
    EXPECT_GE(s->query("x"), 1.0 - 1e-4);
  }
}

TEST(Factory, ElasticBudgetSplit) {
  auto s = lego::make_sketch(lego::SketchKind::d_cms, 4000);
  const auto& e = dynamic_cast<const ElasticSketch&>(*s);
  EXPECT_EQ(e.heavy().size(), 1000u / 17);
  EXPECT_EQ(e.light().memory_bytes(), 3000u);
  auto d = lego::make_sketch(lego::SketchKind::d_lego, 4 * 102400);
  const auto& de = dynamic_cast<const ElasticSketch&>(*d);
  EXPECT_EQ(dynamic_cast<const lego::LegoSketch&>(de.light()).brick_count(), 3u);
}

TEST(Factory, KindNames) {
  EXPECT_EQ(lego::sketch_kind_from_string("d-lego"), lego::SketchKind::d_lego);
  EXPECT_THROW(lego::sketch_kind_from_string("bloom"), lego::Error);
}

TEST(Factory, DeterministicUnderSeed) {
  const auto items = lego::gen_stream({300, 1.0, 5000, 1});
  for (auto kind : {lego::SketchKind::cm, lego::SketchKind::cs, lego::SketchKind::d_lego}) {
    auto a = lego::make_sketch(kind, 8192, {.seed = 5});
    auto b = lego::make_sketch(kind, 8192, {.seed = 5});
    for (const auto& i : items) a->store(i), b->store(i);
    for (int r = 1; r <= 300; ++r) {
      EXPECT_EQ(a->query(lego::rank_item(r)), b->query(lego::rank_item(r)));
    }
  }
}

}  // namespace
