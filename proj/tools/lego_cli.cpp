// lego: generate streams, build sketches, evaluate, benchmark and verify.
//
// Machine-readable output goes to --out (or stdout); the resolved
// configuration and all diagnostics go to stderr.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lego/bundle.hpp"
#include "lego/error.hpp"
#include "lego/eval.hpp"
#include "lego/memory.hpp"
#include "lego/sketch.hpp"
#include "lego/streams.hpp"
#include "lego/theory.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheckFailed = 3;

const std::vector<std::string> kKinds = {"cm", "cs", "lego", "d-cms", "d-lego"};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::uint64_t seed = 42;
  std::string out;
};

void log_config(const std::string& command, const json& config) {
  json line = config;
  line["command"] = command;
  std::cerr << "config: " << line.dump() << '\n';
}

/// Writes to --out when given, stdout otherwise.
void emit(const Global& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(g.out, std::ios::binary);
  if (!out) throw lego::Error(lego::Errc::io_error, "cannot write " + g.out);
  out << text;
  if (!out) throw lego::Error(lego::Errc::io_error, "write failed for " + g.out);
}

std::shared_ptr<const lego::WeightBundle> bundle_or_untrained(const std::string& weights,
                                                              std::uint64_t seed) {
  if (!weights.empty()) {
    return std::make_shared<const lego::WeightBundle>(lego::load_bundle(weights));
  }
  return std::make_shared<const lego::WeightBundle>(lego::WeightBundle::untrained(seed));
}

/// Brick count a lego-backed kind resolves to at this budget, 0 otherwise.
std::size_t resolved_bricks(lego::SketchKind kind, std::size_t budget_bytes,
                            const lego::WeightBundle& bundle) {
  std::size_t lego_budget = 0;
  if (kind == lego::SketchKind::lego) {
    lego_budget = budget_bytes;
  } else if (kind == lego::SketchKind::d_lego) {
    lego_budget = budget_bytes - budget_bytes / 4;
  } else {
    return 0;
  }
  return std::max<std::size_t>(1, lego_budget / lego::brick_bytes(bundle.d1, bundle.d2));
}

std::size_t kb_to_bytes(double kb) {
  if (!(kb > 0.0)) throw UsageError("--budget-kb must be positive");
  return static_cast<std::size_t>(kb * 1024.0);
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.empty()) continue;
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(field);
    } else {
      try {
        std::size_t used = 0;
        const double value = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        out.push_back(static_cast<T>(value));
      } catch (const std::exception&) {
        throw UsageError(std::string("bad number '") + field + "' in " + flag);
      }
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " must list at least one value");
  return out;
}

/// Reads an "item,estimate" CSV (header on the first line).
std::unordered_map<std::string, double> load_estimates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lego::Error(lego::Errc::io_error, "cannot open " + path);
  std::unordered_map<std::string, double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;
    const auto fields = lego::csv_split(line);
    if (fields.size() != 2) {
      throw lego::Error(lego::Errc::io_error,
                        path + ":" + std::to_string(line_no) + ": expected item,estimate");
    }
    try {
      std::size_t used = 0;
      const double value = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("trailing");
      out[fields[0]] = value;
    } catch (const std::exception&) {
      throw lego::Error(lego::Errc::io_error,
                        path + ":" + std::to_string(line_no) + ": bad estimate");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct GenZipfArgs {
  std::uint64_t n = 10000;
  double alpha = 1.0;
  std::uint64_t length = 100000;
  bool exact_quota = false;
};

int run_gen_zipf(const Global& g, const GenZipfArgs& a) {
  log_config("gen-zipf", {{"n", a.n}, {"alpha", a.alpha}, {"length", a.length},
                          {"seed", g.seed}, {"sampling", a.exact_quota ? "exact-quota" : "iid"},
                          {"out", g.out}});
  const auto stream = lego::gen_stream(
      {a.n, a.alpha, a.length, g.seed},
      a.exact_quota ? lego::SamplingMode::exact_quota : lego::SamplingMode::iid);
  std::string text;
  for (const auto& item : stream) text += item + '\n';
  emit(g, text);
  return kExitOk;
}

int run_exact_count(const Global& g, const std::string& in) {
  log_config("exact-count", {{"in", in}, {"out", g.out}});
  const auto table = lego::exact_count(lego::ingest(in));
  std::ostringstream out;
  out << "item,count\n";
  for (const auto& [item, count] : table.entries()) {
    out << lego::csv_escape(item) << ',' << count << '\n';
  }
  emit(g, out.str());
  return kExitOk;
}

struct SketchArgs {
  std::string kind = "lego";
  double budget_kb = 100.0;
  std::string mode = "rule";
  std::string weights;
  std::string store;
  std::string query = "all";
};

int run_sketch(const Global& g, const SketchArgs& a) {
  if (a.mode == "ensemble" && a.weights.empty()) {
    throw UsageError("--mode ensemble requires --weights BUNDLE");
  }
  const auto kind = lego::sketch_kind_from_string(a.kind);
  const std::size_t budget = kb_to_bytes(a.budget_kb);
  lego::SketchOptions options;
  options.seed = g.seed;
  options.mode = a.mode == "ensemble" ? lego::DecodeMode::ensemble : lego::DecodeMode::rule_only;
  options.bundle = bundle_or_untrained(a.weights, g.seed);

  json config = {{"kind", a.kind},     {"budget_bytes", budget}, {"mode", a.mode},
                 {"weights", a.weights}, {"store", a.store},       {"query", a.query},
                 {"seed", g.seed},     {"out", g.out}};
  if (const auto k = resolved_bricks(kind, budget, *options.bundle)) config["K"] = k;
  log_config("sketch", config);

  const auto stream = lego::ingest(a.store);
  auto sketch = lego::make_sketch(kind, budget, options);
  for (const auto& item : stream) sketch->store(item);

  std::vector<std::string> queries;
  if (a.query == "all") {
    const auto distinct = lego::exact_count(stream);
    for (const auto& [item, count] : distinct.entries()) queries.push_back(item);
  } else {
    queries = lego::ingest(a.query);
  }
  std::ostringstream out;
  out.precision(17);
  out << "item,estimate\n";
  for (const auto& item : queries) out << lego::csv_escape(item) << ',' << sketch->query(item) << '\n';
  emit(g, out.str());
  return kExitOk;
}

int run_eval(const Global& g, const std::string& truth_path, const std::string& est_path) {
  log_config("eval", {{"truth", truth_path}, {"est", est_path}, {"out", g.out}});
  const auto truth = lego::FrequencyTable::load_csv(truth_path);
  const auto estimates = load_estimates(est_path);
  const auto m = lego::metrics(truth, estimates);
  const json out = {{"aae", m.aae}, {"are", m.are}, {"mse", m.mse},
                    {"n", truth.distinct()}, {"N", truth.total()}};
  emit(g, out.dump(2) + '\n');
  return kExitOk;
}

struct SweepArgs {
  std::string kinds = "cm,cs,lego";
  std::string budgets_kb = "100,200,400";
  std::string in;
  std::string mode = "rule";
  std::string weights;
};

int run_sweep(const Global& g, const SweepArgs& a) {
  if (a.mode == "ensemble" && a.weights.empty()) {
    throw UsageError("--mode ensemble requires --weights BUNDLE");
  }
  std::vector<lego::SketchKind> kinds;
  for (const auto& name : parse_list<std::string>(a.kinds, "--kinds")) {
    if (std::find(kKinds.begin(), kKinds.end(), name) == kKinds.end()) {
      throw UsageError("unknown kind '" + name + "' in --kinds (cm, cs, lego, d-cms, d-lego)");
    }
    kinds.push_back(lego::sketch_kind_from_string(name));
  }
  std::vector<std::size_t> budgets;
  for (double kb : parse_list<double>(a.budgets_kb, "--budgets-kb")) budgets.push_back(kb_to_bytes(kb));

  lego::SketchOptions options;
  options.seed = g.seed;
  options.mode = a.mode == "ensemble" ? lego::DecodeMode::ensemble : lego::DecodeMode::rule_only;
  options.bundle = bundle_or_untrained(a.weights, g.seed);

  json resolved_k = json::object();
  for (auto kind : kinds) {
    for (auto budget : budgets) {
      if (const auto k = resolved_bricks(kind, budget, *options.bundle)) {
        resolved_k[std::string(lego::to_string(kind)) + "@" + std::to_string(budget)] = k;
      }
    }
  }
  log_config("sweep", {{"kinds", a.kinds}, {"budgets_kb", a.budgets_kb}, {"in", a.in},
                       {"mode", a.mode}, {"weights", a.weights}, {"seed", g.seed},
                       {"out", g.out}, {"K", resolved_k}});

  const auto stream = lego::ingest(a.in);
  const auto reports = lego::sweep(kinds, budgets, stream, options, a.in);
  std::ostringstream out;
  lego::write_reports_csv(out, reports);
  emit(g, out.str());
  return kExitOk;
}

struct BenchArgs {
  std::string kind = "lego";
  double budget_kb = 100.0;
  std::string in;
  std::string op = "store";
  int runs = 5;
};

int run_bench(const Global& g, const BenchArgs& a) {
  const auto kind = lego::sketch_kind_from_string(a.kind);
  const std::size_t budget = kb_to_bytes(a.budget_kb);
  if (a.runs < 1) throw UsageError("--runs must be at least 1");
  lego::SketchOptions options;
  options.seed = g.seed;
  options.bundle = bundle_or_untrained("", g.seed);

  json config = {{"kind", a.kind}, {"budget_bytes", budget}, {"in", a.in}, {"op", a.op},
                 {"runs", a.runs}, {"seed", g.seed},         {"out", g.out}};
  if (const auto k = resolved_bricks(kind, budget, *options.bundle)) config["K"] = k;
  log_config("bench", config);

  const auto stream = lego::ingest(a.in);
  const auto op = a.op == "query" ? lego::BenchOp::query : lego::BenchOp::store;
  const auto r = lego::throughput(kind, budget, stream, op, options, a.runs);
  const json out = {{"kind", a.kind},          {"budget_bytes", budget},
                    {"op", a.op},              {"N", stream.size()},
                    {"ops_per_sec", r.ops_per_sec}, {"run_rates", r.run_rates}};
  emit(g, out.dump(2) + '\n');
  return kExitOk;
}

struct VerifyArgs {
  int theorem = 3;
  // --theorem 1
  std::size_t samples = 100000;
  std::string weights;
  double significance = 0.01;
  // --theorem 2
  double alpha = -1.0;  // negative selects the per-check default
  std::uint64_t bricks = 10;
  std::uint64_t r_prime = 50;
  std::size_t mc_trials = 60000;
  // --theorem 3
  std::uint64_t n = 10000;
  std::uint64_t length = 100000;
  double epsilon = 0.01;
  int trials = 50;
  std::size_t d2 = 5120;
};

int run_verify(const Global& g, VerifyArgs a) {
  namespace th = lego::theory;
  th::CheckVerdict verdict;
  verdict.theorem = a.theorem;

  if (a.theorem == 1) {
    log_config("verify", {{"theorem", 1}, {"samples", a.samples}, {"weights", a.weights},
                          {"significance", a.significance}, {"seed", g.seed}, {"out", g.out}});
    const auto table = bundle_or_untrained(a.weights, g.seed)->make_table();
    const auto r = th::domain_invariance_check(table, a.samples, g.seed, a.significance);
    double max_d = 0.0;
    double min_p = 1.0;
    for (const auto& c : r.components) {
      max_d = std::max(max_d, c.statistic);
      min_p = std::min(min_p, c.p_value);
    }
    verdict.parameters = {{"samples", static_cast<double>(a.samples)},
                          {"significance", a.significance},
                          {"threshold", r.threshold},
                          {"seed", static_cast<double>(g.seed)}};
    verdict.statistic = max_d;
    verdict.bound_or_pvalue = min_p;
    verdict.pass = r.pass;
  } else if (a.theorem == 2) {
    if (a.alpha < 0.0) a.alpha = 0.8;
    log_config("verify", {{"theorem", 2}, {"alpha", a.alpha}, {"K", a.bricks},
                          {"r_prime", a.r_prime}, {"mc_trials", a.mc_trials}, {"seed", g.seed},
                          {"out", g.out}});
    th::SubSkewnessParams p;
    p.alpha = a.alpha;
    p.bricks = a.bricks;
    p.r_prime = a.r_prime;
    const auto sum = th::expected_sub_skewness(p);
    const auto mc = th::simulate_sub_skewness(a.alpha, a.bricks, a.r_prime, a.mc_trials, g.seed);
    const double diff = std::abs(sum.value - mc.mean);
    verdict.parameters = {{"alpha", a.alpha},
                          {"K", static_cast<double>(a.bricks)},
                          {"r_prime", static_cast<double>(a.r_prime)},
                          {"mc_mean", mc.mean},
                          {"mc_standard_error", mc.standard_error},
                          {"mc_trials", static_cast<double>(a.mc_trials)},
                          {"d_max", static_cast<double>(sum.d_max)},
                          {"r_max", static_cast<double>(sum.r_max)},
                          {"tail_bound", sum.tail_bound},
                          {"seed", static_cast<double>(g.seed)}};
    verdict.statistic = sum.value;
    verdict.bound_or_pvalue = 3.0 * mc.standard_error;
    verdict.pass = diff <= 3.0 * mc.standard_error && sum.tail_bound <= p.tail_tolerance;
  } else if (a.theorem == 3) {
    if (a.alpha < 0.0) a.alpha = 0.7;
    log_config("verify", {{"theorem", 3}, {"n", a.n}, {"alpha", a.alpha}, {"length", a.length},
                          {"epsilon", a.epsilon}, {"trials", a.trials}, {"d2", a.d2},
                          {"seed", g.seed}, {"out", g.out}});
    const auto r = th::mc_error_check({a.n, a.alpha, a.length, g.seed}, a.epsilon, a.trials,
                                      g.seed, 5, a.d2);
    verdict.parameters = {{"n", static_cast<double>(a.n)},
                          {"alpha", a.alpha},
                          {"N", static_cast<double>(a.length)},
                          {"epsilon", a.epsilon},
                          {"trials", static_cast<double>(a.trials)},
                          {"d2", static_cast<double>(a.d2)},
                          {"standard_error", r.standard_error},
                          {"observations", static_cast<double>(r.observations)},
                          {"min_error", r.min_error},
                          {"seed", static_cast<double>(g.seed)}};
    verdict.statistic = r.exceed_rate;
    verdict.bound_or_pvalue = r.bound;
    verdict.pass = r.pass;
  } else {
    throw UsageError("--theorem must be 1, 2 or 3");
  }

  emit(g, th::verdict_to_json(verdict) + '\n');
  std::cerr << "verify --theorem " << a.theorem << ": " << (verdict.pass ? "pass" : "FAIL") << '\n';
  return verdict.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lego sketch frequency estimation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out", g.out, "Output file (stdout when omitted)");

  GenZipfArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-zipf", "Write a Zipf stream, one item per line");
  gen_cmd->add_option("--n", gen.n, "Distinct items")->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--alpha", gen.alpha, "Skewness")->capture_default_str()->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--length", gen.length, "Stream length N")->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_flag("--exact-quota", gen.exact_quota, "Largest-remainder counts instead of iid draws");

  std::string count_in;
  auto* count_cmd = app.add_subcommand("exact-count", "Exact item counts as item,count CSV");
  count_cmd->add_option("--in", count_in, "Stream file")->required();

  SketchArgs sk;
  auto* sketch_cmd = app.add_subcommand("sketch", "Store a stream and write item,estimate CSV");
  sketch_cmd->add_option("--kind", sk.kind)->capture_default_str()->check(CLI::IsMember(kKinds));
  sketch_cmd->add_option("--budget-kb", sk.budget_kb)->capture_default_str();
  sketch_cmd->add_option("--mode", sk.mode)->capture_default_str()->check(CLI::IsMember({"rule", "ensemble"}));
  sketch_cmd->add_option("--weights", sk.weights, "Weight bundle JSON");
  sketch_cmd->add_option("--store", sk.store, "Stream file to store")->required();
  sketch_cmd->add_option("--query", sk.query, "'all' or a file of items")->capture_default_str();

  std::string truth_path, est_path;
  auto* eval_cmd = app.add_subcommand("eval", "AAE/ARE/MSE of estimates against exact counts");
  eval_cmd->add_option("--truth", truth_path, "item,count CSV")->required();
  eval_cmd->add_option("--est", est_path, "item,estimate CSV")->required();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy over kinds x budgets as CSV");
  sweep_cmd->add_option("--kinds", sw.kinds, "Comma-separated kinds")->capture_default_str();
  sweep_cmd->add_option("--budgets-kb", sw.budgets_kb, "Comma-separated budgets")->capture_default_str();
  sweep_cmd->add_option("--in", sw.in, "Stream file")->required();
  sweep_cmd->add_option("--mode", sw.mode)->capture_default_str()->check(CLI::IsMember({"rule", "ensemble"}));
  sweep_cmd->add_option("--weights", sw.weights, "Weight bundle JSON");

  BenchArgs bn;
  auto* bench_cmd = app.add_subcommand("bench", "Single-thread store or query throughput");
  bench_cmd->add_option("--kind", bn.kind)->capture_default_str()->check(CLI::IsMember(kKinds));
  bench_cmd->add_option("--budget-kb", bn.budget_kb)->capture_default_str();
  bench_cmd->add_option("--in", bn.in, "Stream file")->required();
  bench_cmd->add_option("--op", bn.op)->capture_default_str()->check(CLI::IsMember({"store", "query"}));
  bench_cmd->add_option("--runs", bn.runs, "Timed passes")->capture_default_str();

  VerifyArgs vf;
  auto* verify_cmd = app.add_subcommand("verify", "Numerical check of a sketch property; exit 3 on failure");
  verify_cmd->add_option("--theorem", vf.theorem, "Which check (see flag help prefixes)")->required()->check(CLI::IsMember({1, 2, 3}));
  verify_cmd->add_option("--samples", vf.samples, "1: items per domain")->capture_default_str();
  verify_cmd->add_option("--weights", vf.weights, "1: bundle whose table is tested");
  verify_cmd->add_option("--significance", vf.significance, "1: family-wise level")->capture_default_str();
  verify_cmd->add_option("--alpha", vf.alpha, "2, 3: skewness (defaults 0.8, 0.7)");
  verify_cmd->add_option("--bricks", vf.bricks, "2: K")->capture_default_str();
  verify_cmd->add_option("--r-prime", vf.r_prime, "2: sub-rank")->capture_default_str();
  verify_cmd->add_option("--mc-trials", vf.mc_trials, "2: simulation trials")->capture_default_str();
  verify_cmd->add_option("--n", vf.n, "3: distinct items")->capture_default_str();
  verify_cmd->add_option("--length", vf.length, "3: stream length")->capture_default_str();
  verify_cmd->add_option("--epsilon", vf.epsilon, "3: error threshold")->capture_default_str();
  verify_cmd->add_option("--trials", vf.trials, "3: Monte-Carlo trials")->capture_default_str();
  verify_cmd->add_option("--d2", vf.d2, "3: brick width")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << " (see --help)\n";
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen_zipf(g, gen);
    if (*count_cmd) return run_exact_count(g, count_in);
    if (*sketch_cmd) return run_sketch(g, sk);
    if (*eval_cmd) return run_eval(g, truth_path, est_path);
    if (*sweep_cmd) return run_sweep(g, sw);
    if (*bench_cmd) return run_bench(g, bn);
    if (*verify_cmd) return run_verify(g, vf);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const lego::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
