#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mtrec {

/// A recommended title: the cleaned line and its comparison key.
struct TitleKey {
  std::string display;
  std::string key;

  bool operator==(const TitleKey&) const = default;
};

struct RankedList {
  std::vector<TitleKey> items;
  std::size_t k_requested = 0;
  bool truncated = false;
  std::size_t raw_line_count = 0;

  bool empty() const noexcept { return items.empty(); }
  std::size_t size() const noexcept { return items.size(); }
  std::vector<std::string> keys() const;

  /// Builds a list directly from already-clean titles (keys derived with
  /// normalize_title). Duplicates are dropped.
  static RankedList from_titles(const std::vector<std::string>& titles,
                                std::size_t k_requested = 0);
};

/// Strips enumeration markers ("1.", "2)", "-", "*", "•"), surrounding quotes
/// and trailing periods; the key is the case-folded, NFC, whitespace-collapsed
/// display. Throws ParseError when nothing is left.
TitleKey normalize_title(std::string_view line);

/// Splits a completion into at most k distinct titles. Lines ending in ':',
/// lines without letters and apology/refusal openers ("I'm sorry",
/// "As an AI", ...) are skipped. Never throws on content; an empty list
/// means the response was unparseable.
RankedList parse_recommendations(std::string_view raw_text, std::size_t k);

/// Displays joined with '\n'.
std::string serialize(const RankedList& list);

}  // namespace mtrec
