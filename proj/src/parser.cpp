#include "mtrec/parser.hpp"

#include <unordered_set>

#include "mtrec/error.hpp"
#include "mtrec/text.hpp"

namespace mtrec {
namespace {

constexpr std::string_view kBullet = "\xE2\x80\xA2";  // U+2022

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Removes one leading enumeration marker; returns false when none matched.
bool strip_enumeration(std::string_view& s) {
  std::size_t i = 0;
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
    const std::size_t next = i + 1;
    // "1." / "2)" followed by a space or the end; "2.5" or "1.Foo" stay.
    if (next == s.size() || text::is_space(s[next])) {
      s.remove_prefix(next);
      return true;
    }
  }
  if (s.size() >= 2 && (s[0] == '-' || s[0] == '*') && text::is_space(s[1])) {
    s.remove_prefix(2);
    return true;
  }
  if (s.starts_with(kBullet)) {
    s.remove_prefix(kBullet.size());
    return true;
  }
  return false;
}

bool strip_quotes(std::string_view& s) {
  static constexpr std::string_view kPairs[][2] = {
      {"\"", "\""},
      {"'", "'"},
      {"\xE2\x80\x9C", "\xE2\x80\x9D"},  // curly double quotes
      {"\xE2\x80\x98", "\xE2\x80\x99"},  // curly single quotes
  };
  for (const auto& pair : kPairs) {
    const auto open = pair[0];
    const auto close = pair[1];
    if (s.size() >= open.size() + close.size() && s.starts_with(open) &&
        s.ends_with(close)) {
      s.remove_prefix(open.size());
      s.remove_suffix(close.size());
      return true;
    }
  }
  return false;
}

bool strip_trailing_periods(std::string_view& s) {
  bool changed = false;
  while (!s.empty() && s.back() == '.') {
    s.remove_suffix(1);
    changed = true;
  }
  return changed;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const char c = s[i] >= 'A' && s[i] <= 'Z' ? static_cast<char>(s[i] - 'A' + 'a') : s[i];
    if (c != prefix[i]) return false;
  }
  return true;
}

// Apologies and refusals are prose, not titles.
bool is_refusal(std::string_view line) {
  static constexpr std::string_view kOpeners[] = {
      "i'm sorry",  "i\xE2\x80\x99m sorry", "i am sorry", "i apologize",
      "as an ai",   "unfortunately,",       "i cannot",   "i can't"};
  for (const auto opener : kOpeners) {
    if (starts_with_ci(line, opener)) return true;
  }
  return false;
}

bool is_preamble(std::string_view line) {
  return line.back() == ':' || !text::has_letter(line) || is_refusal(line);
}

}  // namespace

std::vector<std::string> RankedList::keys() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.key);
  return out;
}

RankedList RankedList::from_titles(const std::vector<std::string>& titles,
                                   std::size_t k_requested) {
  RankedList list;
  list.k_requested = k_requested == 0 ? titles.size() : k_requested;
  list.raw_line_count = titles.size();
  std::unordered_set<std::string> seen;
  for (const auto& title : titles) {
    auto key = normalize_title(title);
    if (seen.insert(key.key).second) list.items.push_back(std::move(key));
  }
  return list;
}

TitleKey normalize_title(std::string_view line) {
  std::string_view s = text::trim(line);
  bool changed = true;
  while (changed && !s.empty()) {
    changed = strip_enumeration(s);
    changed = strip_trailing_periods(s) || changed;
    s = text::trim(s);
    changed = strip_quotes(s) || changed;
    s = text::trim(s);
  }
  if (s.empty()) {
    throw ParseError("title empty after stripping: '" + std::string(line) + "'");
  }
  TitleKey title;
  title.display = std::string(s);
  title.key = text::collapse_whitespace(text::fold_case_nfc(title.display));
  if (title.key.empty()) throw ParseError("title key empty: '" + std::string(line) + "'");
  return title;
}

RankedList parse_recommendations(std::string_view raw_text, std::size_t k) {
  RankedList list;
  list.k_requested = k;
  std::unordered_set<std::string> seen;
  std::size_t candidates = 0;

  std::size_t start = 0;
  while (start <= raw_text.size()) {
    std::size_t end = raw_text.find('\n', start);
    if (end == std::string_view::npos) end = raw_text.size();
    ++list.raw_line_count;
    const auto line = text::trim(raw_text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || is_preamble(line)) continue;
    TitleKey title;
    try {
      title = normalize_title(line);
    } catch (const ParseError&) {
      continue;
    }
    if (is_preamble(title.display)) continue;
    if (!seen.insert(title.key).second) continue;
    ++candidates;
    if (list.items.size() < k) list.items.push_back(std::move(title));
    if (end == raw_text.size()) break;
  }
  list.truncated = candidates > k;
  return list;
}

std::string serialize(const RankedList& list) {
  std::string out;
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += list.items[i].display;
  }
  return out;
}

}  // namespace mtrec
