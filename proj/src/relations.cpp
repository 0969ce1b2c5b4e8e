#include "mtrec/relations.hpp"

#include <cmath>

#include "mtrec/error.hpp"
#include "mtrec/random.hpp"
#include "mtrec/text.hpp"

namespace mtrec {
namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

MetamorphicRelation MetamorphicRelation::multiply(int lambda) {
  MetamorphicRelation r;
  r.kind = MrKind::kMr1;
  r.lambda = lambda;
  return r;
}

MetamorphicRelation MetamorphicRelation::shift(int lambda) {
  MetamorphicRelation r;
  r.kind = MrKind::kMr2;
  r.lambda = lambda;
  return r;
}

MetamorphicRelation MetamorphicRelation::spaces(double space_prob, std::uint64_t seed) {
  MetamorphicRelation r;
  r.kind = MrKind::kMr3;
  r.space_prob = space_prob;
  r.seed = seed;
  return r;
}

MetamorphicRelation MetamorphicRelation::words(double word_prob, std::uint64_t seed,
                                               std::vector<std::string> vocabulary) {
  MetamorphicRelation r;
  r.kind = MrKind::kMr4;
  r.word_prob = word_prob;
  r.seed = seed;
  r.vocabulary = std::move(vocabulary);
  return r;
}

void MetamorphicRelation::validate(const RatingScale& scale) const {
  switch (kind) {
    case MrKind::kMr1:
      if (lambda < 1) throw InvalidArgument("MR1 requires lambda >= 1");
      break;
    case MrKind::kMr2:
      if (lambda == 0) throw InvalidArgument("MR2 requires lambda != 0");
      if (scale.min + lambda < 1) {
        throw InvalidArgument("MR2 requires scale.min + lambda >= 1");
      }
      break;
    case MrKind::kMr3:
      check_probability(space_prob, "space_prob");
      break;
    case MrKind::kMr4:
      check_probability(word_prob, "word_prob");
      if (vocabulary.empty()) throw InvalidArgument("MR4 vocabulary is empty");
      for (const auto& w : vocabulary) {
        if (w.empty() || w.find_first_of(" \t\r\n") != std::string::npos) {
          throw InvalidArgument("MR4 vocabulary words must be single non-empty tokens");
        }
      }
      break;
  }
}

std::pair<int, RatingScale> mr1_scale_rating(int numerator, const RatingScale& scale,
                                             int lambda) {
  if (lambda < 1) throw InvalidArgument("MR1 requires lambda >= 1");
  return {lambda * numerator, RatingScale{lambda * scale.min, lambda * scale.max}};
}

std::pair<int, RatingScale> mr2_shift_rating(int numerator, const RatingScale& scale,
                                             int lambda) {
  if (scale.min + lambda < 1) {
    throw InvalidArgument("MR2 requires scale.min + lambda >= 1");
  }
  return {numerator + lambda, RatingScale{scale.min + lambda, scale.max + lambda}};
}

std::string mr3_insert_spaces(std::string_view input, double space_prob,
                              std::uint64_t seed) {
  check_probability(space_prob, "space_prob");
  Rng rng(seed);
  const auto points = text::utf8_codepoints(input);
  std::string out;
  out.reserve(input.size() + input.size() / 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out.append(points[i]);
    if (i + 1 == points.size()) break;
    const bool gap = !text::is_space(points[i].front()) && !text::is_space(points[i + 1].front());
    if (gap && rng.bernoulli(space_prob)) out.push_back(' ');
  }
  return out;
}

std::string mr4_insert_words(std::string_view input, double word_prob,
                             const std::vector<std::string>& vocabulary,
                             std::uint64_t seed) {
  check_probability(word_prob, "word_prob");
  if (vocabulary.empty()) throw InvalidArgument("MR4 vocabulary is empty");
  Rng rng(seed);
  const auto tokens = text::split_spaces(input);
  std::string out;
  out.reserve(input.size() + input.size() / 4);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) {
      out.push_back(' ');
      if (rng.bernoulli(word_prob)) {
        out += vocabulary[rng.below(vocabulary.size())];
        out.push_back(' ');
      }
    }
    out += tokens[i];
  }
  return out;
}

Prompt derive_followup(const UserHistory& history, const Prompt& source,
                       const MetamorphicRelation& relation, const PromptOptions& options) {
  if (!source.is_source()) {
    throw InvalidArgument("follow-ups must be derived from a source prompt");
  }
  relation.validate(source.scale);

  Prompt followup;
  switch (relation.kind) {
    case MrKind::kMr1:
    case MrKind::kMr2: {
      UserHistory transformed = history;
      for (auto& item : transformed.items) {
        auto [numerator, scale] =
            relation.kind == MrKind::kMr1
                ? mr1_scale_rating(item.rating_numerator, item.scale, relation.lambda)
                : mr2_shift_rating(item.rating_numerator, item.scale, relation.lambda);
        item.rating_numerator = numerator;
        item.scale = scale;
      }
      const auto [unused, scale] =
          relation.kind == MrKind::kMr1
              ? mr1_scale_rating(source.scale.min, source.scale, relation.lambda)
              : mr2_shift_rating(source.scale.min, source.scale, relation.lambda);
      PromptOptions rendered = options;
      // Multiplication keeps the original lower bound in the scale sentence
      // ("1 being lowest and 10 being highest").
      if (relation.kind == MrKind::kMr1) {
        rendered.sentence_scale = RatingScale{source.scale.min, scale.max};
      }
      followup = render_prompt(transformed, scale, source.k, rendered);
      break;
    }
    case MrKind::kMr3:
      followup = source;
      followup.text = mr3_insert_spaces(source.text, relation.space_prob, relation.seed);
      break;
    case MrKind::kMr4:
      followup = source;
      followup.text = mr4_insert_words(source.text, relation.word_prob, relation.vocabulary,
                                       relation.seed);
      break;
  }
  followup.derived_from = relation.kind;
  return followup;
}

}  // namespace mtrec
