#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mtrec/dataset.hpp"

namespace mtrec {

inline constexpr std::string_view kMockApology =
    "I'm sorry, but I couldn't understand the request.";

/// Content-based stand-in for the LLM under test.
///
/// The prompt is read back with `parse_prompt`, ignoring the default MR4
/// vocabulary. Each resolved item gets weight (n - min + 1) / (d - min + 1),
/// with `min` taken from the scale sentence, so rating multiplication and
/// shifting leave the weights unchanged. A catalog movie scores
/// sum_i weight_i * jaccard(genres, genres_i); movies already in the prompt
/// are skipped, ties go to the smaller title. Titles are looked up verbatim,
/// so a title with inserted spaces is not resolved.
///
/// With noise > 0 each rank r in [0, k) swaps with rank r + 1 of the
/// top-(k + 1) candidates with probability `noise`.
class MockRecommender {
 public:
  explicit MockRecommender(std::shared_ptr<const MovieCatalog> catalog);

  /// Numbered list ("1. Title") of k movies, or the apology when the prompt
  /// has no item list or no requested count.
  std::string recommend(std::string_view prompt_text, double noise_level,
                        std::uint64_t seed) const;

 private:
  struct GenreGroup {
    std::uint64_t mask = 0;
    std::vector<std::size_t> movies;  // indices into titles_, title order
  };

  std::shared_ptr<const MovieCatalog> catalog_;
  std::vector<std::string> titles_;
  std::vector<std::uint64_t> masks_;
  std::unordered_map<std::string, std::size_t> by_title_;
  std::vector<GenreGroup> groups_;
};

/// One-shot form; builds the catalog index on every call.
std::string mock_recommend(std::string_view prompt_text, double noise_level,
                           std::uint64_t seed, const MovieCatalog& catalog);

}  // namespace mtrec
