#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mtrec/parser.hpp"

namespace mtrec {

enum class KendallMode {
  kUnionTied,     // tau-b over the union, absent keys tied at length + 1
  kIntersection,  // tau-a over shared keys only
};

std::string_view to_string(KendallMode mode);
KendallMode kendall_mode_from_string(std::string_view name);

struct SimilarityTriple {
  double kendall = 0.0;
  double rbo = 0.0;
  double overlap = 0.0;

  bool operator==(const SimilarityTriple&) const = default;
};

struct MetricConfig {
  KendallMode kendall_mode = KendallMode::kUnionTied;
  double rbo_p = 0.9;
  std::size_t k = 5;
};

// The key-vector overloads are the computational core; RankedList overloads
// forward to them.

double overlap_ratio(const std::vector<std::string>& a,
                     const std::vector<std::string>& b, std::size_t k);
double overlap_ratio(const RankedList& a, const RankedList& b, std::size_t k);

/// Identical key sequences score 1. Throws InvalidArgument when both lists
/// are empty. Pairs with a zero tau-b denominator score 0, as does the
/// intersection mode with fewer than two shared keys.
double kendall_tau(const std::vector<std::string>& a,
                   const std::vector<std::string>& b,
                   KendallMode mode = KendallMode::kUnionTied);
double kendall_tau(const RankedList& a, const RankedList& b,
                   KendallMode mode = KendallMode::kUnionTied);

/// Extrapolated rank-biased overlap evaluated to depth max(|a|, |b|):
///
///   (X_D / D) p^D + ((1 - p) / p) * sum_{d=1..D} (X_d / d) p^d
///
/// where X_d is the overlap of the two depth-d prefixes (an exhausted list
/// contributes all of its items). Throws InvalidArgument for p outside
/// (0, 1) or when both lists are empty.
double rbo_ext(const std::vector<std::string>& a,
               const std::vector<std::string>& b, double p);
double rbo_ext(const RankedList& a, const RankedList& b, double p);

/// Width of the interval the full RBO can still occupy given the evaluated
/// prefix: mass that unseen items could add if every one of them agreed.
double rbo_residual(const std::vector<std::string>& a,
                    const std::vector<std::string>& b, double p);

/// All three metrics of `candidate` against `baseline`. An empty candidate
/// gives overlap 0, rbo 0 and the mode's degenerate tau (0). Throws
/// InvalidArgument when the baseline is empty.
SimilarityTriple similarity_triple(const RankedList& baseline,
                                   const RankedList& candidate,
                                   const MetricConfig& config);

}  // namespace mtrec
