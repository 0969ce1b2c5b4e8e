#include "mtrec/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "mtrec/error.hpp"

namespace mtrec {
namespace {

using RankPair = std::pair<std::size_t, std::size_t>;

// Number of inversions of `v`, sorting it as a side effect.
std::uint64_t count_inversions(std::vector<std::size_t>& v, std::vector<std::size_t>& buffer,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = count_inversions(v, buffer, lo, mid) +
                        count_inversions(v, buffer, mid, hi);
  std::size_t i = lo, j = mid, out = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      buffer[out++] = v[j++];
    } else {
      buffer[out++] = v[i++];
    }
  }
  while (i < mid) buffer[out++] = v[i++];
  while (j < hi) buffer[out++] = v[j++];
  std::copy(buffer.begin() + lo, buffer.begin() + hi, v.begin() + lo);
  return swaps;
}

template <typename Key>
std::uint64_t tied_pairs(const std::vector<Key>& sorted) {
  std::uint64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      ties += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

// Knight's O(n log n) tau-b over rank pairs. Zero denominator -> 0.
double tau_b(std::vector<RankPair> pairs) {
  const std::uint64_t n = pairs.size();
  if (n < 2) return 0.0;
  const std::uint64_t total = n * (n - 1) / 2;

  std::sort(pairs.begin(), pairs.end());
  std::vector<std::size_t> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = pairs[i].first;
  const std::uint64_t x_ties = tied_pairs(xs);
  const std::uint64_t joint_ties = tied_pairs(pairs);

  std::vector<std::size_t> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = pairs[i].second;
  std::vector<std::size_t> buffer(n);
  const std::uint64_t swaps = count_inversions(ys, buffer, 0, n);
  const std::uint64_t y_ties = tied_pairs(ys);

  const double numerator = static_cast<double>(total) - static_cast<double>(x_ties) -
                           static_cast<double>(y_ties) + static_cast<double>(joint_ties) -
                           2.0 * static_cast<double>(swaps);
  const double denominator = std::sqrt(static_cast<double>(total - x_ties) *
                                       static_cast<double>(total - y_ties));
  if (denominator == 0.0) return 0.0;
  return std::clamp(numerator / denominator, -1.0, 1.0);
}

std::unordered_map<std::string, std::size_t> positions(const std::vector<std::string>& list) {
  std::unordered_map<std::string, std::size_t> pos;
  pos.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) pos.emplace(list[i], i + 1);
  return pos;
}

void check_p(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("rbo persistence p must lie in (0, 1)");
}

}  // namespace

std::string_view to_string(KendallMode mode) {
  return mode == KendallMode::kUnionTied ? "union_tied" : "intersection";
}

KendallMode kendall_mode_from_string(std::string_view name) {
  if (name == "union_tied") return KendallMode::kUnionTied;
  if (name == "intersection") return KendallMode::kIntersection;
  throw InvalidArgument("unknown kendall mode '" + std::string(name) + "'");
}

double overlap_ratio(const std::vector<std::string>& a, const std::vector<std::string>& b,
                     std::size_t k) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (a.size() > k || b.size() > k) throw InvalidArgument("list longer than k");
  const std::unordered_set<std::string> in_a(a.begin(), a.end());
  std::size_t shared = 0;
  for (const auto& key : std::unordered_set<std::string>(b.begin(), b.end())) {
    shared += in_a.count(key);
  }
  return static_cast<double>(shared) / static_cast<double>(k);
}

double overlap_ratio(const RankedList& a, const RankedList& b, std::size_t k) {
  return overlap_ratio(a.keys(), b.keys(), k);
}

double kendall_tau(const std::vector<std::string>& a, const std::vector<std::string>& b,
                   KendallMode mode) {
  if (a.empty() && b.empty()) throw InvalidArgument("no items to compare");
  if (a == b) return 1.0;

  const auto pos_a = positions(a);
  const auto pos_b = positions(b);
  std::vector<RankPair> pairs;

  if (mode == KendallMode::kIntersection) {
    for (const auto& key : a) {
      if (const auto it = pos_b.find(key); it != pos_b.end()) {
        pairs.emplace_back(pos_a.at(key), it->second);
      }
    }
    if (pairs.size() < 2) return 0.0;
    return tau_b(std::move(pairs));
  }

  const std::size_t absent_a = a.size() + 1;
  const std::size_t absent_b = b.size() + 1;
  for (const auto& key : a) {
    const auto it = pos_b.find(key);
    pairs.emplace_back(pos_a.at(key), it == pos_b.end() ? absent_b : it->second);
  }
  for (const auto& key : b) {
    if (!pos_a.contains(key)) pairs.emplace_back(absent_a, pos_b.at(key));
  }
  return tau_b(std::move(pairs));
}

double kendall_tau(const RankedList& a, const RankedList& b, KendallMode mode) {
  return kendall_tau(a.keys(), b.keys(), mode);
}

double rbo_ext(const std::vector<std::string>& a, const std::vector<std::string>& b,
               double p) {
  check_p(p);
  const std::size_t depth = std::max(a.size(), b.size());
  if (depth == 0) throw InvalidArgument("no items to compare");

  std::unordered_set<std::string> seen_a, seen_b;
  std::size_t overlap = 0;
  double weighted = 0.0;
  double p_power = 1.0;
  for (std::size_t d = 1; d <= depth; ++d) {
    if (d <= a.size() && seen_a.insert(a[d - 1]).second && seen_b.contains(a[d - 1])) {
      ++overlap;
    }
    if (d <= b.size() && seen_b.insert(b[d - 1]).second && seen_a.contains(b[d - 1])) {
      ++overlap;
    }
    p_power *= p;
    weighted += static_cast<double>(overlap) / static_cast<double>(d) * p_power;
  }
  const double agreement = static_cast<double>(overlap) / static_cast<double>(depth);
  const double value = agreement * p_power + (1.0 - p) / p * weighted;
  return std::clamp(value, 0.0, 1.0);
}

double rbo_ext(const RankedList& a, const RankedList& b, double p) {
  return rbo_ext(a.keys(), b.keys(), p);
}

double rbo_residual(const std::vector<std::string>& a, const std::vector<std::string>& b,
                    double p) {
  check_p(p);
  const std::size_t depth = std::max(a.size(), b.size());
  if (depth == 0) throw InvalidArgument("no items to compare");
  const std::unordered_set<std::string> in_a(a.begin(), a.end());
  std::size_t overlap = 0;
  for (const auto& key : std::unordered_set<std::string>(b.begin(), b.end())) {
    overlap += in_a.count(key);
  }
  double residual = 0.0;
  double p_power = std::pow(p, static_cast<double>(depth));  // p^(d-1) at d = depth + 1
  for (std::size_t d = depth + 1;; ++d) {
    const double best = std::min<double>(static_cast<double>(d),
                                         static_cast<double>(overlap + 2 * (d - depth)));
    const double term = (1.0 - p) * p_power * (best - static_cast<double>(overlap)) /
                        static_cast<double>(d);
    residual += term;
    if (term < 1e-17 || d > depth + 100000) break;
    p_power *= p;
  }
  return residual;
}

SimilarityTriple similarity_triple(const RankedList& baseline, const RankedList& candidate,
                                   const MetricConfig& config) {
  if (baseline.empty()) throw InvalidArgument("baseline list is empty");
  const auto base_keys = baseline.keys();
  const auto cand_keys = candidate.keys();
  const std::size_t k = std::max({config.k, base_keys.size(), cand_keys.size()});
  SimilarityTriple triple;
  triple.kendall = kendall_tau(base_keys, cand_keys, config.kendall_mode);
  triple.rbo = rbo_ext(base_keys, cand_keys, config.rbo_p);
  triple.overlap = overlap_ratio(base_keys, cand_keys, k);
  return triple;
}

}  // namespace mtrec
