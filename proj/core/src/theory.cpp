#include "lego/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "lego/bundle.hpp"
#include "lego/error.hpp"
#include "lego/lego_sketch.hpp"

namespace lego::theory {
namespace {

double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double log_sum_exp(std::span<const double> xs) {
  const double top = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - top);
  return top + std::log(s);
}

/// P(Binomial(trials, p) < successes), i.e. the r'-th success comes after
/// `trials` trials.
double late_success_probability(std::uint64_t trials, std::uint64_t successes, double p) {
  if (trials < successes) return 1.0;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  std::vector<double> terms;
  terms.reserve(successes);
  for (std::uint64_t j = 0; j < successes; ++j) {
    terms.push_back(log_choose(trials, j) + static_cast<double>(j) * lp +
                    static_cast<double>(trials - j) * lq);
  }
  return std::min(1.0, std::exp(log_sum_exp(terms)));
}

}  // namespace

double sub_skewness_point(double alpha, std::uint64_t r_prime, std::uint64_t distance,
                          std::uint64_t rank) {
  if (distance < 1 || r_prime < 1 || rank < r_prime) {
    throw Error(Errc::invalid_configuration, "sub-skewness needs D >= 1 and r >= r' >= 1");
  }
  return alpha * std::log1p(static_cast<double>(distance) / static_cast<double>(rank)) /
         std::log1p(1.0 / static_cast<double>(r_prime));
}

double sub_skewness_tail_bound(std::uint64_t bricks, std::uint64_t r_prime, std::uint64_t d_max,
                               std::uint64_t r_max) {
  if (bricks <= 1) return (d_max >= 1 && r_max >= r_prime) ? 0.0 : 1.0;
  const double p = 1.0 / static_cast<double>(bricks);
  const double distance_tail = std::exp(static_cast<double>(d_max) * std::log1p(-p));
  return std::min(1.0, distance_tail + late_success_probability(r_max, r_prime, p));
}

SubSkewnessResult expected_sub_skewness(const SubSkewnessParams& params) {
  const std::uint64_t k = params.bricks;
  const std::uint64_t rp = params.r_prime;
  if (k < 1 || rp < 1) {
    throw Error(Errc::invalid_configuration, "sub-skewness needs K >= 1 and r' >= 1");
  }
  SubSkewnessResult result;
  const auto span_k = static_cast<std::uint64_t>(std::ceil(40.0 * static_cast<double>(k)));
  result.d_max = params.d_max ? params.d_max : span_k;
  result.r_max = params.r_max ? params.r_max : rp + span_k + result.d_max;
  result.tail_bound = sub_skewness_tail_bound(k, rp, result.d_max, result.r_max);
  if (params.r_max == 0) {
    while (result.tail_bound > params.tail_tolerance && result.r_max < (1ULL << 40)) {
      result.r_max += result.r_max / 2;
      result.tail_bound = sub_skewness_tail_bound(k, rp, result.d_max, result.r_max);
    }
  }
  if (result.tail_bound > params.tail_tolerance) {
    throw Error(Errc::truncation_too_small,
                "truncation leaves tail mass " + std::to_string(result.tail_bound) +
                    " above tolerance " + std::to_string(params.tail_tolerance));
  }

  if (k == 1) {
    // (K-1)^0 = 1 only at D = 1, r = r'.
    result.value = sub_skewness_point(params.alpha, rp, 1, rp);
    return result;
  }

  const double log_k = std::log(static_cast<double>(k));
  const double log_k1 = std::log(static_cast<double>(k - 1));
  std::vector<double> p_distance(result.d_max);
  for (std::uint64_t d = 1; d <= result.d_max; ++d) {
    p_distance[d - 1] = std::exp(static_cast<double>(d - 1) * log_k1 - static_cast<double>(d) * log_k);
  }
  const double denom = std::log1p(1.0 / static_cast<double>(rp));
  double total = 0.0;
  for (std::uint64_t r = rp; r <= result.r_max; ++r) {
    const double p_rank = std::exp(static_cast<double>(r - rp) * log_k1 -
                                   static_cast<double>(r) * log_k + log_choose(r - 1, rp - 1));
    if (p_rank == 0.0) continue;
    double inner = 0.0;
    const double rank = static_cast<double>(r);
    for (std::uint64_t d = 1; d <= result.d_max; ++d) {
      inner += p_distance[d - 1] * std::log1p(static_cast<double>(d) / rank);
    }
    total += p_rank * inner;
  }
  result.value = params.alpha * total / denom;
  return result;
}

MonteCarloEstimate simulate_sub_skewness(double alpha, std::uint64_t bricks,
                                         std::uint64_t r_prime, std::size_t trials,
                                         std::uint64_t seed) {
  if (bricks < 1 || r_prime < 1 || trials < 2) {
    throw Error(Errc::invalid_configuration, "simulation needs K >= 1, r' >= 1, trials >= 2");
  }
  StreamRng rng(seed);
  const double p = 1.0 / static_cast<double>(bricks);
  const double log_q = std::log1p(-p);
  // Gap to the next retained rank, Geometric(p) on {1, 2, ...}.
  auto gap = [&]() -> std::uint64_t {
    if (bricks == 1) return 1;
    const double u = 1.0 - rng.uniform();  // (0, 1]
    return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / log_q));
  };
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::uint64_t rank = 0;
    for (std::uint64_t s = 0; s < r_prime; ++s) rank += gap();
    const double x = sub_skewness_point(alpha, r_prime, gap(), rank);
    const double delta = x - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (x - mean);
  }
  MonteCarloEstimate out;
  out.mean = mean;
  out.trials = trials;
  out.standard_error = std::sqrt(m2 / static_cast<double>(trials - 1) / static_cast<double>(trials));
  return out;
}

double error_bound(double epsilon, std::uint64_t d2) {
  if (!(epsilon > 0.0) || d2 == 0) {
    throw Error(Errc::invalid_configuration, "error bound needs epsilon > 0 and d2 >= 1");
  }
  return 1.0 / (epsilon * static_cast<double>(d2));
}

ErrorCheckResult mc_error_check(const ZipfSpec& stream, double epsilon, int trials,
                                std::uint64_t seed, std::size_t d1, std::size_t d2) {
  if (trials < 30) throw Error(Errc::invalid_configuration, "error check needs trials >= 30");
  ErrorCheckResult result;
  result.bound = error_bound(epsilon, d2);
  result.min_error = std::numeric_limits<double>::infinity();
  const double threshold = epsilon * static_cast<double>(stream.length);
  std::uint64_t exceed = 0;
  SeedSequence seeds(seed);
  for (int t = 0; t < trials; ++t) {
    ZipfSpec spec = stream;
    spec.seed = seeds.next().value;
    auto bundle = std::make_shared<const WeightBundle>(
        WeightBundle::untrained(seeds.next().value, d1, d2));
    LegoSketch sketch(bundle, 1, DecodeMode::rule_only);
    const auto items = gen_stream(spec);
    for (const auto& item : items) sketch.store(item);
    const auto truth = exact_count(items);
    for (const auto& [item, count] : truth.entries()) {
      const double err = sketch.query(item) - static_cast<double>(count);
      result.min_error = std::min(result.min_error, err);
      if (err >= threshold) ++exceed;
      ++result.observations;
    }
  }
  result.exceed_rate = static_cast<double>(exceed) / static_cast<double>(result.observations);
  const double p = std::min(result.bound, 1.0);
  result.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(result.observations));
  result.pass = result.exceed_rate <= result.bound + 3.0 * result.standard_error;
  return result;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double y = -pi2 / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(odd * odd * y);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw Error(Errc::invalid_configuration, "KS test needs two non-empty samples");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

DomainCheckResult compare_embedding_domains(std::span<const std::string> first,
                                            std::span<const std::string> second,
                                            const EmbedFn& embed, double significance) {
  if (first.empty() || second.empty()) {
    throw Error(Errc::invalid_configuration, "domain check needs items in both domains");
  }
  const std::size_t rows = embed(first.front()).size();
  std::vector<std::vector<double>> xs(rows), ys(rows);
  for (const auto& item : first) {
    const auto v = embed(item);
    for (std::size_t k = 0; k < rows; ++k) xs[k].push_back(v[k]);
  }
  for (const auto& item : second) {
    const auto v = embed(item);
    for (std::size_t k = 0; k < rows; ++k) ys[k].push_back(v[k]);
  }
  DomainCheckResult result;
  result.threshold = significance / static_cast<double>(rows);
  result.pass = true;
  for (std::size_t k = 0; k < rows; ++k) {
    result.components.push_back(ks_two_sample(std::move(xs[k]), std::move(ys[k])));
    if (result.components.back().p_value < result.threshold) result.pass = false;
  }
  return result;
}

std::vector<std::string> random_integer_items(std::size_t count, std::uint64_t seed) {
  StreamRng rng(seed);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(encode_int_item(rng.bits()));
  return out;
}

std::vector<std::string> random_string_items(std::size_t count, std::uint64_t seed) {
  static constexpr std::string_view kAlphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-./:";
  StreamRng rng(seed);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string s(rng.between(4, 24), ' ');
    for (char& c : s) c = kAlphabet[rng.below(kAlphabet.size())];
    out.push_back(std::move(s));
  }
  return out;
}

DomainCheckResult domain_invariance_check(const EmbeddingTable& table, std::size_t samples,
                                          std::uint64_t seed, double significance) {
  SeedSequence seeds(seed);
  const auto ints = random_integer_items(samples, seeds.next().value);
  const auto strings = random_string_items(samples, seeds.next().value);
  return compare_embedding_domains(
      ints, strings, [&table](std::string_view item) { return table.embed(item); }, significance);
}

std::string verdict_to_json(const CheckVerdict& v) {
  nlohmann::json j;
  j["theorem"] = v.theorem;
  j["parameters"] = v.parameters;
  j["statistic"] = v.statistic;
  j["bound_or_pvalue"] = v.bound_or_pvalue;
  j["pass"] = v.pass;
  return j.dump(2);
}

}  // namespace lego::theory
