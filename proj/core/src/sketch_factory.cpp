#include <memory>

#include "lego/baselines.hpp"
#include "lego/bundle.hpp"
#include "lego/error.hpp"
#include "lego/lego_sketch.hpp"
#include "lego/sketch.hpp"

namespace lego {
namespace {

// Separates the heavy-slot seed stream from the light part's row seeds.
constexpr std::uint64_t kHeavySeedSalt = 0x6865617679ULL;

std::unique_ptr<FrequencySketch> make_core(SketchKind kind, std::size_t budget_bytes,
                                           const SketchOptions& options) {
  switch (kind) {
    case SketchKind::cm:
      return std::make_unique<CmSketch>(CmSketch::for_budget(budget_bytes, options.seed));
    case SketchKind::cs:
      return std::make_unique<CSketch>(CSketch::for_budget(budget_bytes, options.seed));
    case SketchKind::lego: {
      auto bundle = options.bundle ? options.bundle
                                   : std::make_shared<const WeightBundle>(
                                         WeightBundle::untrained(options.seed));
      return std::make_unique<LegoSketch>(
          LegoSketch::for_budget(std::move(bundle), budget_bytes, options.mode));
    }
    default:
      break;
  }
  throw Error(Errc::invalid_configuration, "not a core sketch kind");
}

}  // namespace

std::string_view to_string(SketchKind kind) noexcept {
  switch (kind) {
    case SketchKind::cm: return "cm";
    case SketchKind::cs: return "cs";
    case SketchKind::lego: return "lego";
    case SketchKind::d_cms: return "d-cms";
    case SketchKind::d_lego: return "d-lego";
  }
  return "unknown";
}

SketchKind sketch_kind_from_string(std::string_view name) {
  for (auto kind : {SketchKind::cm, SketchKind::cs, SketchKind::lego, SketchKind::d_cms,
                    SketchKind::d_lego}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(Errc::invalid_configuration,
              "unknown sketch kind '" + std::string(name) + "' (cm, cs, lego, d-cms, d-lego)");
}

std::unique_ptr<FrequencySketch> make_sketch(SketchKind kind, std::size_t budget_bytes,
                                             const SketchOptions& options) {
  if (kind != SketchKind::d_cms && kind != SketchKind::d_lego) {
    return make_core(kind, budget_bytes, options);
  }
  const std::size_t heavy_budget = budget_bytes / 4;
  const std::size_t light_budget = budget_bytes - heavy_budget;
  auto light = make_core(kind == SketchKind::d_cms ? SketchKind::cm : SketchKind::lego,
                         light_budget, options);
  SeedSequence seq(options.seed ^ kHeavySeedSalt);
  return std::make_unique<ElasticSketch>(heavy_buckets_for_budget(budget_bytes), seq.next(),
                                         options.elastic_lambda, std::move(light));
}

}  // namespace lego
