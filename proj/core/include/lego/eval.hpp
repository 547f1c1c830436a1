#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lego/sketch.hpp"
#include "lego/streams.hpp"

namespace lego {

struct Metrics {
  double aae = 0.0;
  double are = 0.0;
  double mse = 0.0;
};

/// Averages over the distinct items of `truth`. Throws Errc::missing_estimate
/// if an item has no estimate.
Metrics metrics(const FrequencyTable& truth,
                const std::unordered_map<std::string, double>& estimates);

struct EstimateRow {
  std::string item;
  std::uint64_t truth = 0;
  double estimate = 0.0;
};

Metrics metrics(std::span<const EstimateRow> rows);

struct EstimateReport {
  std::string kind;
  std::size_t budget_bytes = 0;
  std::uint64_t seed = 0;
  std::string stream;  // free-form description of the input
  std::uint64_t distinct = 0;
  std::uint64_t length = 0;
  double ms = 0.0;  // wall-clock for build + query
  Metrics aggregates;
  std::vector<EstimateRow> rows;
};

/// Stores every item of `stream` into `sketch`, then queries each distinct
/// item once.
EstimateReport evaluate(FrequencySketch& sketch, std::span<const std::string> stream,
                        const FrequencyTable& truth);

/// One report per (kind, budget) cell, in kinds-major order.
std::vector<EstimateReport> sweep(std::span<const SketchKind> kinds,
                                  std::span<const std::size_t> budgets,
                                  std::span<const std::string> stream,
                                  const SketchOptions& options,
                                  const std::string& stream_label = "");

inline constexpr const char* kReportCsvHeader = "kind,budget_bytes,aae,are,mse,n,N,seed,ms";

void write_reports_csv(std::ostream& out, std::span<const EstimateReport> reports);
void write_detail_csv(std::ostream& out, const EstimateReport& report);
std::string reports_to_json(std::span<const EstimateReport> reports);

enum class BenchOp { store, query };

struct ThroughputResult {
  double ops_per_sec = 0.0;           // median over runs
  std::vector<double> run_rates;      // ops/s of each timed run
};

/// Single-thread rate over the whole stream: one untimed warm-up pass, then
/// `runs` timed passes; reports the median. Each store pass starts from an
/// empty sketch; query passes run against a sketch holding the stream.
ThroughputResult throughput(SketchKind kind, std::size_t budget_bytes,
                            std::span<const std::string> stream, BenchOp op,
                            const SketchOptions& options = {}, int runs = 5);

}  // namespace lego
