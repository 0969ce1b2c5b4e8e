#include "mtrec/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "mtrec/error.hpp"
#include "mtrec/text.hpp"

namespace mtrec {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

template <typename Int>
std::optional<Int> digits_at(std::string_view s, std::size_t pos, std::size_t* end = nullptr) {
  std::size_t stop = pos;
  while (stop < s.size() && is_digit(s[stop])) ++stop;
  if (stop == pos) return std::nullopt;
  Int value{};
  const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + stop, value);
  if (ec != std::errc{}) return std::nullopt;
  if (end != nullptr) *end = stop;
  return value;
}

// Integer that ends right before `end` (digits immediately preceding it).
std::optional<int> digits_before(std::string_view s, std::size_t end) {
  std::size_t start = end;
  while (start > 0 && is_digit(s[start - 1])) --start;
  if (start == end) return std::nullopt;
  return digits_at<int>(s, start);
}

std::string remove_words(std::string_view text, const std::vector<std::string>& words) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text::is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !text::is_space(text[j])) ++j;
    if (j > i) {
      const std::string_view token = text.substr(i, j - i);
      if (std::find(words.begin(), words.end(), token) == words.end()) {
        if (!out.empty()) out.push_back(' ');
        out.append(token);
      }
    }
    i = j;
  }
  return out;
}

struct RatingToken {
  std::size_t numerator_start = 0;
  int numerator = 0;
  int denominator = 0;
  std::size_t terminator = 0;  // index of the ',' or '.', or size()
};

// Matches " <digits> ?/ ?<digits> ?[,.]" around the '/' at `slash`.
std::optional<RatingToken> rating_token_at(std::string_view s, std::size_t slash,
                                           std::size_t lower_bound) {
  std::size_t left_end = slash;
  if (left_end > lower_bound && s[left_end - 1] == ' ') --left_end;
  std::size_t left = left_end;
  while (left > lower_bound && is_digit(s[left - 1])) --left;
  if (left == left_end || left == lower_bound || s[left - 1] != ' ') return std::nullopt;

  std::size_t right = slash + 1;
  if (right < s.size() && s[right] == ' ') ++right;
  std::size_t right_end = right;
  const auto denominator = digits_at<int>(s, right, &right_end);
  if (!denominator) return std::nullopt;
  std::size_t term = right_end;
  if (term < s.size() && s[term] == ' ') ++term;
  if (term < s.size() && s[term] != ',' && s[term] != '.') return std::nullopt;

  RatingToken token;
  token.numerator_start = left;
  token.numerator = *digits_at<int>(s, left);
  token.denominator = *denominator;
  token.terminator = term;
  return token;
}

}  // namespace

std::string_view to_string(MrKind kind) {
  switch (kind) {
    case MrKind::kMr1: return "MR1";
    case MrKind::kMr2: return "MR2";
    case MrKind::kMr3: return "MR3";
    case MrKind::kMr4: return "MR4";
  }
  return "MR?";
}

MrKind mr_kind_from_string(std::string_view name) {
  if (name == "MR1") return MrKind::kMr1;
  if (name == "MR2") return MrKind::kMr2;
  if (name == "MR3") return MrKind::kMr3;
  if (name == "MR4") return MrKind::kMr4;
  throw InvalidArgument("unknown relation '" + std::string(name) + "'");
}

std::string Prompt::lineage() const {
  if (is_source()) return "source";
  return "followup(" + std::string(to_string(*derived_from)) + ")";
}

std::string render_rated_item(std::string_view title, int numerator,
                              const RatingScale& scale) {
  if (!scale.contains(numerator)) {
    throw InvalidArgument("rating " + std::to_string(numerator) + " outside scale (" +
                          std::to_string(scale.min) + "," + std::to_string(scale.max) +
                          ")");
  }
  std::string out(title);
  out += ' ';
  out += std::to_string(numerator);
  out += '/';
  out += std::to_string(scale.max);
  return out;
}

Prompt render_prompt(const UserHistory& history, const RatingScale& scale,
                     std::size_t k, const PromptOptions& options) {
  if (history.items.empty()) throw InvalidArgument("cannot render an empty history");
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (scale.min >= scale.max) throw InvalidArgument("rating scale needs min < max");

  const RatingScale sentence = options.sentence_scale.value_or(scale);
  std::string text =
      "Given a user, as a recommender system, provide recommendations. The user ";
  text += std::to_string(history.user_id);
  text += " likes the following items: ";
  for (std::size_t i = 0; i < history.items.size(); ++i) {
    if (i > 0) text += ", ";
    const auto& item = history.items[i];
    text += render_rated_item(item.title, item.rating_numerator, scale);
  }
  text += ". (";
  text += std::to_string(sentence.min);
  text += " being lowest and ";
  text += std::to_string(sentence.max);
  text += " being highest ). Give me back ";
  text += std::to_string(k);
  text += " recommendations";
  if (options.format_suffix) text += kFormatSuffix;

  return Prompt{history.user_id, std::move(text), scale, k, std::nullopt};
}

ParsedPrompt parse_prompt(std::string_view raw, const std::vector<std::string>& ignored_words) {
  ParsedPrompt parsed;
  const std::string clean = remove_words(raw, ignored_words);
  const std::string compact = text::strip_whitespace(clean);

  if (const auto pos = compact.find("Theuser"); pos != std::string::npos) {
    parsed.user_id = digits_at<UserId>(compact, pos + 7);
  }
  if (const auto pos = compact.find("beinglowestand"); pos != std::string::npos) {
    const auto low = digits_before(compact, pos);
    std::size_t high_end = 0;
    const auto high = digits_at<int>(compact, pos + 14, &high_end);
    if (low && high && compact.compare(high_end, 12, "beinghighest") == 0) {
      parsed.sentence_scale = RatingScale{*low, *high};
    }
  }
  if (const auto pos = compact.find("Givemeback"); pos != std::string::npos) {
    parsed.k = digits_at<std::size_t>(compact, pos + 10);
  }

  const auto colon = clean.find(':');
  if (colon == std::string::npos) return parsed;
  std::size_t segment = colon + 1;
  std::size_t scan = segment;
  while (scan < clean.size()) {
    const auto slash = clean.find('/', scan);
    if (slash == std::string::npos) break;
    const auto token = rating_token_at(clean, slash, segment);
    if (!token) {
      scan = slash + 1;
      continue;
    }
    const auto title = text::trim(
        std::string_view(clean).substr(segment, token->numerator_start - segment));
    if (!title.empty()) {
      parsed.items.push_back(
          ParsedItem{std::string(title), token->numerator, token->denominator});
    }
    if (token->terminator >= clean.size() || clean[token->terminator] == '.') break;
    segment = token->terminator + 1;
    scan = segment;
  }
  return parsed;
}

}  // namespace mtrec
