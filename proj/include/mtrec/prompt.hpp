#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtrec/dataset.hpp"

namespace mtrec {

enum class MrKind { kMr1, kMr2, kMr3, kMr4 };

std::string_view to_string(MrKind kind);  // "MR1".."MR4"
MrKind mr_kind_from_string(std::string_view name);

inline constexpr std::string_view kFormatSuffix =
    ", one movie per line and don't give any explanation";

struct PromptOptions {
  bool format_suffix = true;
  /// Bounds printed in the scale sentence when they differ from the item
  /// scale (rating multiplication keeps the original lower bound).
  std::optional<RatingScale> sentence_scale;
};

struct Prompt {
  UserId user_id = 0;
  std::string text;
  RatingScale scale;
  std::size_t k = 0;
  /// Empty for a source prompt, otherwise the relation that produced it.
  std::optional<MrKind> derived_from;

  bool is_source() const noexcept { return !derived_from.has_value(); }
  std::string lineage() const;  // "source" or "followup(MRn)"
};

/// "{title} {numerator}/{scale.max}"; throws InvalidArgument when the
/// numerator is outside the scale.
std::string render_rated_item(std::string_view title, int numerator,
                              const RatingScale& scale);

/// Renders the recommendation instruction for `history`. Throws
/// InvalidArgument on an empty history, k < 1, or an out-of-scale item.
Prompt render_prompt(const UserHistory& history, const RatingScale& scale,
                     std::size_t k, const PromptOptions& options = {});

/// One "title n/d" entry recovered from prompt text.
struct ParsedItem {
  std::string title;
  int numerator = 0;
  int denominator = 0;
};

/// What a reader of a rendered prompt can recover from it.
struct ParsedPrompt {
  std::optional<UserId> user_id;
  std::vector<ParsedItem> items;
  std::optional<RatingScale> sentence_scale;
  std::optional<std::size_t> k;
};

/// Reads a rendered prompt back. Anchors (user, scale sentence, count) are
/// matched with whitespace ignored; titles are whitespace-collapsed but
/// otherwise taken verbatim. Tokens equal to a word in `ignored_words` are
/// removed before parsing.
ParsedPrompt parse_prompt(std::string_view text,
                          const std::vector<std::string>& ignored_words = {});

}  // namespace mtrec
