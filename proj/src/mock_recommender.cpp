#include "mtrec/mock_recommender.hpp"

#include <algorithm>
#include <bit>
#include <map>

#include "mtrec/error.hpp"
#include "mtrec/prompt.hpp"
#include "mtrec/random.hpp"
#include "mtrec/relations.hpp"
#include "mtrec/text.hpp"

namespace mtrec {
namespace {

double jaccard(std::uint64_t a, std::uint64_t b) {
  const int unions = std::popcount(a | b);
  if (unions == 0) return 0.0;
  return static_cast<double>(std::popcount(a & b)) / static_cast<double>(unions);
}

struct WeightedMask {
  std::uint64_t mask;
  double weight;
};

}  // namespace

MockRecommender::MockRecommender(std::shared_ptr<const MovieCatalog> catalog)
    : catalog_(std::move(catalog)) {
  if (!catalog_) throw InvalidArgument("mock recommender needs a catalog");
  std::map<std::string, int> genre_bits;
  std::map<std::uint64_t, std::size_t> group_of_mask;
  titles_.reserve(catalog_->size());
  masks_.reserve(catalog_->size());
  for (const auto& [id, movie] : catalog_->entries()) {
    std::uint64_t mask = 0;
    for (const auto& genre : movie.genres) {
      auto [it, inserted] = genre_bits.emplace(genre, static_cast<int>(genre_bits.size()));
      mask |= std::uint64_t{1} << (it->second % 64);
    }
    const std::size_t index = titles_.size();
    titles_.push_back(movie.title);
    masks_.push_back(mask);
    by_title_.emplace(text::collapse_whitespace(movie.title), index);
    auto [group, inserted] = group_of_mask.emplace(mask, groups_.size());
    if (inserted) groups_.push_back(GenreGroup{mask, {}});
    groups_[group->second].movies.push_back(index);
  }
  for (auto& group : groups_) {
    std::sort(group.movies.begin(), group.movies.end(), [this](std::size_t a, std::size_t b) {
      if (titles_[a] != titles_[b]) return titles_[a] < titles_[b];
      return a < b;
    });
  }
}

std::string MockRecommender::recommend(std::string_view prompt_text, double noise_level,
                                       std::uint64_t seed) const {
  const ParsedPrompt parsed = parse_prompt(prompt_text, kDefaultVocabulary);
  if (!parsed.k || *parsed.k == 0 || parsed.items.empty()) {
    return std::string(kMockApology);
  }
  const std::size_t k = *parsed.k;
  const int lowest = parsed.sentence_scale ? parsed.sentence_scale->min : 1;

  std::vector<WeightedMask> liked;
  std::vector<std::size_t> in_prompt;
  for (const auto& item : parsed.items) {
    const auto it = by_title_.find(text::collapse_whitespace(item.title));
    if (it == by_title_.end()) continue;
    const int span = item.denominator - lowest + 1;
    const int value = item.numerator - lowest + 1;
    if (span <= 0 || value <= 0) continue;
    liked.push_back(WeightedMask{masks_[it->second],
                                 static_cast<double>(value) / static_cast<double>(span)});
    in_prompt.push_back(it->second);
  }
  std::sort(in_prompt.begin(), in_prompt.end());
  const auto excluded = [&](std::size_t index) {
    return std::binary_search(in_prompt.begin(), in_prompt.end(), index);
  };

  std::vector<std::pair<double, std::size_t>> group_scores;
  group_scores.reserve(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    double score = 0.0;
    for (const auto& item : liked) score += item.weight * jaccard(groups_[g].mask, item.mask);
    group_scores.emplace_back(score, g);
  }
  std::sort(group_scores.begin(), group_scores.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  // Walk score tiers from the top; within a tier candidates merge by title.
  const std::size_t wanted = k + 1;
  std::vector<std::size_t> ranked;
  std::size_t tier = 0;
  while (ranked.size() < wanted && tier < group_scores.size()) {
    std::size_t tier_end = tier;
    while (tier_end < group_scores.size() &&
           group_scores[tier_end].first == group_scores[tier].first) {
      ++tier_end;
    }
    std::vector<std::size_t> pool;
    const std::size_t take = wanted - ranked.size() + in_prompt.size();
    for (std::size_t t = tier; t < tier_end; ++t) {
      const auto& movies = groups_[group_scores[t].second].movies;
      for (std::size_t i = 0; i < movies.size() && i < take; ++i) pool.push_back(movies[i]);
    }
    std::sort(pool.begin(), pool.end(), [this](std::size_t a, std::size_t b) {
      if (titles_[a] != titles_[b]) return titles_[a] < titles_[b];
      return a < b;
    });
    for (std::size_t index : pool) {
      if (ranked.size() == wanted) break;
      if (!excluded(index)) ranked.push_back(index);
    }
    tier = tier_end;
  }

  Rng rng(seed);
  for (std::size_t r = 0; r < k && r + 1 < ranked.size(); ++r) {
    if (rng.bernoulli(noise_level)) std::swap(ranked[r], ranked[r + 1]);
  }

  std::string out;
  for (std::size_t r = 0; r < k && r < ranked.size(); ++r) {
    if (r > 0) out.push_back('\n');
    out += std::to_string(r + 1);
    out += ". ";
    out += titles_[ranked[r]];
  }
  return out;
}

std::string mock_recommend(std::string_view prompt_text, double noise_level,
                           std::uint64_t seed, const MovieCatalog& catalog) {
  if (!(noise_level >= 0.0 && noise_level <= 1.0)) {
    throw InvalidArgument("noise level must lie in [0, 1]");
  }
  return MockRecommender(std::make_shared<const MovieCatalog>(catalog))
      .recommend(prompt_text, noise_level, seed);
}

}  // namespace mtrec
