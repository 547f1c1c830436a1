#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lego/embedding.hpp"
#include "lego/streams.hpp"

namespace lego::theory {

// ---------------------------------------------------------------------------
// Sub-skewness of a hash-partitioned Zipf stream
// ---------------------------------------------------------------------------

/// alpha * log(1 + D / r) / log(1 + 1 / r'): the local log-log slope between
/// two items adjacent in sub-rank (r', r' + 1) whose global ranks are r and
/// r + D.
double sub_skewness_point(double alpha, std::uint64_t r_prime, std::uint64_t distance,
                          std::uint64_t rank);

struct SubSkewnessParams {
  double alpha = 1.0;
  std::uint64_t bricks = 1;
  std::uint64_t r_prime = 1;
  /// Truncation limits; zero selects the defaults (see expected_sub_skewness).
  std::uint64_t d_max = 0;
  std::uint64_t r_max = 0;
  double tail_tolerance = 1e-9;
};

struct SubSkewnessResult {
  double value = 0.0;
  double tail_bound = 0.0;  // probability mass dropped by truncation
  std::uint64_t d_max = 0;
  std::uint64_t r_max = 0;
};

/// P(D > d_max) + P(r > r_max) for D ~ Geometric(1/K) on {1, 2, ...} and
/// r the trial index of the r'-th success at rate 1/K.
double sub_skewness_tail_bound(std::uint64_t bricks, std::uint64_t r_prime, std::uint64_t d_max,
                               std::uint64_t r_max);

/// Truncated double sum over D >= 1 and r >= r' of the sub-skewness point
/// weighted by (K-1)^(r+D-r'-1) / K^(D+r) * C(r-1, r'-1), evaluated in log
/// space. K = 1 keeps only D = 1, r = r' (0^0 = 1) and returns alpha.
///
/// Defaults: d_max = ceil(40 K); r_max starts at r' + ceil(40 K) + d_max and
/// is extended until the tail bound meets the tolerance. Explicit limits
/// that leave too much tail mass throw Errc::truncation_too_small.
SubSkewnessResult expected_sub_skewness(const SubSkewnessParams& params);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

/// Bernoulli(1/K) thinning of the rank sequence; averages the slope between
/// the r'-th and (r'+1)-th retained ranks.
MonteCarloEstimate simulate_sub_skewness(double alpha, std::uint64_t bricks,
                                         std::uint64_t r_prime, std::size_t trials,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Error bound of the rule-based estimate
// ---------------------------------------------------------------------------

/// 1 / (epsilon * d2).
double error_bound(double epsilon, std::uint64_t d2);

struct ErrorCheckResult {
  double exceed_rate = 0.0;
  double bound = 0.0;
  double standard_error = 0.0;  // binomial, evaluated at the bound
  std::uint64_t observations = 0;
  double min_error = 0.0;  // smallest f'' - f seen; never below -1e-4 in theory
  bool pass = false;
};

/// Monte-Carlo check of P(f'' - f >= eps N) <= 1 / (eps d2) on a single-brick
/// rule-only sketch. Every trial draws a fresh stream and fresh hash seeds.
ErrorCheckResult mc_error_check(const ZipfSpec& stream, double epsilon, int trials,
                                std::uint64_t seed, std::size_t d1 = 5, std::size_t d2 = 5120);

// ---------------------------------------------------------------------------
// Domain invariance of the embedding
// ---------------------------------------------------------------------------

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value (Stephens'
/// small-sample correction). Ties are handled by stepping both ECDFs.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct DomainCheckResult {
  std::vector<KsResult> components;
  double threshold = 0.0;  // per-component significance after Bonferroni
  bool pass = false;
};

using EmbedFn = std::function<EmbeddingVector(std::string_view item)>;

/// Per-component two-sample KS between the embeddings of two item sets.
DomainCheckResult compare_embedding_domains(std::span<const std::string> first,
                                            std::span<const std::string> second,
                                            const EmbedFn& embed, double significance = 0.01);

/// Random 8-byte integer items and random printable strings.
std::vector<std::string> random_integer_items(std::size_t count, std::uint64_t seed);
std::vector<std::string> random_string_items(std::size_t count, std::uint64_t seed);

/// `samples` integer-domain vs `samples` string-domain items through the
/// table's hash embedding.
DomainCheckResult domain_invariance_check(const EmbeddingTable& table, std::size_t samples,
                                          std::uint64_t seed, double significance = 0.01);

// ---------------------------------------------------------------------------

struct CheckVerdict {
  int theorem = 0;
  std::map<std::string, double> parameters;
  double statistic = 0.0;
  double bound_or_pvalue = 0.0;
  bool pass = false;
};

/// {theorem, parameters, statistic, bound_or_pvalue, pass}
std::string verdict_to_json(const CheckVerdict& verdict);

}  // namespace lego::theory
