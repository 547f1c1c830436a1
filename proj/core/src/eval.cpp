#include "lego/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "lego/error.hpp"

namespace lego {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

Metrics metrics(std::span<const EstimateRow> rows) {
  Metrics m;
  if (rows.empty()) return m;
  for (const auto& row : rows) {
    const double err = std::abs(row.estimate - static_cast<double>(row.truth));
    m.aae += err;
    m.are += err / static_cast<double>(row.truth);
    m.mse += err * err;
  }
  const auto n = static_cast<double>(rows.size());
  m.aae /= n;
  m.are /= n;
  m.mse /= n;
  return m;
}

Metrics metrics(const FrequencyTable& truth,
                const std::unordered_map<std::string, double>& estimates) {
  std::vector<EstimateRow> rows;
  rows.reserve(truth.distinct());
  for (const auto& [item, count] : truth.entries()) {
    auto it = estimates.find(item);
    if (it == estimates.end()) {
      throw Error(Errc::missing_estimate, "no estimate for item '" + item + "'");
    }
    rows.push_back({item, count, it->second});
  }
  return metrics(rows);
}

EstimateReport evaluate(FrequencySketch& sketch, std::span<const std::string> stream,
                        const FrequencyTable& truth) {
  EstimateReport report;
  report.kind = std::string(sketch.kind());
  report.distinct = truth.distinct();
  report.length = truth.total();
  const auto start = Clock::now();
  for (const auto& item : stream) sketch.store(item);
  report.rows.reserve(truth.distinct());
  for (const auto& [item, count] : truth.entries()) {
    report.rows.push_back({item, count, sketch.query(item)});
  }
  report.ms = elapsed_ms(start);
  report.aggregates = metrics(report.rows);
  return report;
}

std::vector<EstimateReport> sweep(std::span<const SketchKind> kinds,
                                  std::span<const std::size_t> budgets,
                                  std::span<const std::string> stream,
                                  const SketchOptions& options, const std::string& stream_label) {
  if (kinds.empty() || budgets.empty()) {
    throw Error(Errc::invalid_configuration, "sweep needs at least one kind and one budget");
  }
  const FrequencyTable truth = exact_count(stream);
  std::vector<EstimateReport> reports;
  reports.reserve(kinds.size() * budgets.size());
  for (SketchKind kind : kinds) {
    for (std::size_t budget : budgets) {
      auto sketch = make_sketch(kind, budget, options);
      EstimateReport report = evaluate(*sketch, stream, truth);
      report.kind = std::string(to_string(kind));
      report.budget_bytes = budget;
      report.seed = options.seed;
      report.stream = stream_label;
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

void write_reports_csv(std::ostream& out, std::span<const EstimateReport> reports) {
  out << kReportCsvHeader << '\n';
  out.precision(17);
  for (const auto& r : reports) {
    out << r.kind << ',' << r.budget_bytes << ',' << r.aggregates.aae << ',' << r.aggregates.are
        << ',' << r.aggregates.mse << ',' << r.distinct << ',' << r.length << ',' << r.seed << ','
        << r.ms << '\n';
  }
}

void write_detail_csv(std::ostream& out, const EstimateReport& report) {
  out << "item,truth,estimate\n";
  out.precision(17);
  for (const auto& row : report.rows) {
    out << csv_escape(row.item) << ',' << row.truth << ',' << row.estimate << '\n';
  }
}

std::string reports_to_json(std::span<const EstimateReport> reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    out.push_back({{"kind", r.kind},
                   {"budget_bytes", r.budget_bytes},
                   {"aae", r.aggregates.aae},
                   {"are", r.aggregates.are},
                   {"mse", r.aggregates.mse},
                   {"n", r.distinct},
                   {"N", r.length},
                   {"seed", r.seed},
                   {"stream", r.stream},
                   {"ms", r.ms}});
  }
  return out.dump(2);
}

ThroughputResult throughput(SketchKind kind, std::size_t budget_bytes,
                            std::span<const std::string> stream, BenchOp op,
                            const SketchOptions& options, int runs) {
  if (stream.empty() || runs < 1) {
    throw Error(Errc::invalid_configuration, "throughput needs a non-empty stream and runs >= 1");
  }
  ThroughputResult result;
  auto prepared = make_sketch(kind, budget_bytes, options);
  if (op == BenchOp::query) {
    for (const auto& item : stream) prepared->store(item);
  }

  volatile double sink = 0.0;
  auto pass = [&](FrequencySketch& sketch) {
    double acc = 0.0;
    const auto start = Clock::now();
    if (op == BenchOp::store) {
      for (const auto& item : stream) sketch.store(item);
    } else {
      for (const auto& item : stream) acc += sketch.query(item);
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    sink = sink + acc;
    return static_cast<double>(stream.size()) / std::max(seconds, 1e-9);
  };

  // warm-up
  if (op == BenchOp::store) {
    auto scratch = make_sketch(kind, budget_bytes, options);
    pass(*scratch);
  } else {
    pass(*prepared);
  }
  for (int i = 0; i < runs; ++i) {
    if (op == BenchOp::store) {
      auto fresh = make_sketch(kind, budget_bytes, options);
      result.run_rates.push_back(pass(*fresh));
    } else {
      result.run_rates.push_back(pass(*prepared));
    }
  }
  auto sorted = result.run_rates;
  std::sort(sorted.begin(), sorted.end());
  result.ops_per_sec = sorted[sorted.size() / 2];
  return result;
}

}  // namespace lego
