#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mtrec/error.hpp"
#include "mtrec/relations.hpp"
#include "mtrec/text.hpp"
#include "user509_prompts.hpp"

using namespace mtrec;

namespace {

const PromptOptions kNoSuffix{false, std::nullopt};

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> alphabet = {
      "a", "b", "Z", "1", "(", ")", ",", ".", "/", " ", " ", "  ", "\t", "\xC3\xA9", "\xE2\x80\xA2",
      "\xE4\xB8\xAD"};
  std::string s;
  const std::size_t n = rng() % 40;
  for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
  return s;
}

std::vector<std::string> without_vocabulary(const std::string& s,
                                            const std::vector<std::string>& vocabulary) {
  std::vector<std::string> out;
  for (auto& token : text::split_spaces(s)) {
    if (std::find(vocabulary.begin(), vocabulary.end(), token) == vocabulary.end()) {
      out.push_back(token);
    }
  }
  return out;
}

}  // namespace

TEST(Mr1, ScaleRatingExamples) {
  EXPECT_EQ(mr1_scale_rating(2, {1, 5}, 2), std::make_pair(4, RatingScale{2, 10}));
  EXPECT_EQ(mr1_scale_rating(4, {1, 5}, 2), std::make_pair(8, RatingScale{2, 10}));
  EXPECT_EQ(mr1_scale_rating(3, {1, 5}, 1), std::make_pair(3, RatingScale{1, 5}));
  EXPECT_THROW(mr1_scale_rating(3, {1, 5}, 0), InvalidArgument);
}

TEST(Mr1, PreservesNormalizedValueExactly) {
  for (int lambda = 1; lambda <= 10; ++lambda) {
    for (int r = 1; r <= 5; ++r) {
      const auto [n, scale] = mr1_scale_rating(r, {1, 5}, lambda);
      // n / max == r / 5 exactly, by cross multiplication.
      EXPECT_EQ(static_cast<long>(n) * 5, static_cast<long>(r) * scale.max);
    }
  }
}

TEST(Mr2, ShiftRatingExamples) {
  EXPECT_EQ(mr2_shift_rating(2, {1, 5}, 1), std::make_pair(3, RatingScale{2, 6}));
  EXPECT_EQ(mr2_shift_rating(4, {1, 5}, 1), std::make_pair(5, RatingScale{2, 6}));
  EXPECT_EQ(mr2_shift_rating(2, {1, 5}, 0), std::make_pair(2, RatingScale{1, 5}));
  EXPECT_THROW(mr2_shift_rating(2, {1, 5}, -1), InvalidArgument);
}

TEST(Mr2, PreservesRankOrder) {
  for (int lambda = -2; lambda <= 6; ++lambda) {
    const RatingScale scale{3, 7};
    if (scale.min + lambda < 1) {
      EXPECT_THROW(mr2_shift_rating(3, scale, lambda), InvalidArgument);
      continue;
    }
    for (int a = scale.min; a <= scale.max; ++a) {
      for (int b = scale.min; b <= scale.max; ++b) {
        const int sa = mr2_shift_rating(a, scale, lambda).first;
        const int sb = mr2_shift_rating(b, scale, lambda).first;
        EXPECT_EQ(a < b, sa < sb);
        EXPECT_EQ(a == b, sa == sb);
      }
    }
  }
}

TEST(Mr3, Examples) {
  EXPECT_EQ(mr3_insert_spaces("abc", 1.0, 123), "a b c");
  EXPECT_EQ(mr3_insert_spaces("abc", 0.0, 123), "abc");
  EXPECT_EQ(mr3_insert_spaces("ab cd", 1.0, 9), "a b c d");
  EXPECT_EQ(mr3_insert_spaces(user509::kOriginal, 0.3, 42), mr3_insert_spaces(user509::kOriginal, 0.3, 42));
  EXPECT_NE(mr3_insert_spaces(user509::kOriginal, 0.3, 42), mr3_insert_spaces(user509::kOriginal, 0.3, 43));
}

TEST(Mr3, InsertsBetweenCodePointsNotBytes) {
  EXPECT_EQ(mr3_insert_spaces("\xC3\xA9\xC3\xA9", 1.0, 1), "\xC3\xA9 \xC3\xA9");
}

TEST(Mr3, CharacterPreservationProperty) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const std::string s = random_text(rng);
    const double p = (rng() % 11) / 10.0;
    const std::string out = mr3_insert_spaces(s, p, rng());
    ASSERT_EQ(text::strip_whitespace(out), text::strip_whitespace(s)) << s;
    ASSERT_GE(out.size(), s.size());
  }
}

TEST(Mr3, DistinctSeedsDifferAtHalfDensity) {
  int differing = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    differing += mr3_insert_spaces("abcdefghij", 0.5, seed) != mr3_insert_spaces("abcdefghij", 0.5, seed + 1000);
  }
  EXPECT_GE(differing, 45);
}

TEST(Mr4, Examples) {
  EXPECT_EQ(mr4_insert_words(user509::kOriginal, 0.0, kDefaultVocabulary, 5), user509::kOriginal);
  EXPECT_EQ(mr4_insert_words("a b c", 1.0, {"banana"}, 5), "a banana b banana c");
  EXPECT_THROW(mr4_insert_words("a b", 0.5, {}, 5), InvalidArgument);
}

TEST(Mr4, OnlyVocabularyWordsInserted) {
  const std::string out = mr4_insert_words(user509::kOriginal, 1.0, kDefaultVocabulary, 77);
  const auto source = text::split_spaces(user509::kOriginal);
  const auto tokens = text::split_spaces(out);
  ASSERT_EQ(tokens.size(), 2 * source.size() - 1);
  std::set<std::string> used;
  for (std::size_t i = 1; i < tokens.size(); i += 2) used.insert(tokens[i]);
  for (const auto& w : used) {
    EXPECT_NE(std::find(kDefaultVocabulary.begin(), kDefaultVocabulary.end(), w),
              kDefaultVocabulary.end());
  }
  EXPECT_GE(used.size(), 3u);
}

TEST(Mr4, TokenRestorationProperty) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    // Restoration is defined for inputs that do not already contain a
    // vocabulary token.
    const std::string s = random_text(rng);
    const double p = (rng() % 11) / 10.0;
    const std::string out = mr4_insert_words(s, p, kDefaultVocabulary, rng());
    ASSERT_EQ(without_vocabulary(out, kDefaultVocabulary), text::split_spaces(s)) << s;
  }
}

TEST(Mr4, WorkedRowRestoresTheSuffixedOriginal) {
  EXPECT_EQ(without_vocabulary(user509::kMr4, kDefaultVocabulary),
            text::split_spaces(user509::kOriginal +
                               ", one movie per line and don't give any explanation"));
}

TEST(DeriveFollowup, User509Mr1AndMr2ByteExact) {
  const auto history = user509::history();
  const Prompt source = render_prompt(history, {1, 5}, 5, kNoSuffix);
  const Prompt mr1 = derive_followup(history, source, MetamorphicRelation::multiply(2), kNoSuffix);
  const Prompt mr2 = derive_followup(history, source, MetamorphicRelation::shift(1), kNoSuffix);
  EXPECT_EQ(mr1.text, user509::kMr1);
  EXPECT_EQ(mr2.text, user509::kMr2);
  EXPECT_EQ(mr1.lineage(), "followup(MR1)");
  EXPECT_EQ(mr2.lineage(), "followup(MR2)");
  EXPECT_EQ(mr2.scale, (RatingScale{2, 6}));
}

TEST(DeriveFollowup, TextRelations) {
  const auto history = user509::history();
  const Prompt source = render_prompt(history, {1, 5}, 5);
  const Prompt same = derive_followup(history, source, MetamorphicRelation::spaces(0.0, 3));
  EXPECT_EQ(same.text, source.text);
  EXPECT_EQ(same.lineage(), "followup(MR3)");
  const Prompt words = derive_followup(history, source, MetamorphicRelation::words(0.1, 3));
  EXPECT_EQ(words.k, 5u);
  EXPECT_EQ(words.lineage(), "followup(MR4)");
  EXPECT_EQ(without_vocabulary(words.text, kDefaultVocabulary), text::split_spaces(source.text));
}

TEST(DeriveFollowup, RequiresSourcePrompt) {
  const auto history = user509::history();
  const Prompt source = render_prompt(history, {1, 5}, 5);
  const Prompt mr1 = derive_followup(history, source, MetamorphicRelation::multiply(2));
  EXPECT_THROW(derive_followup(history, mr1, MetamorphicRelation::shift(1)), InvalidArgument);
}

TEST(MetamorphicRelation, Validate) {
  EXPECT_NO_THROW(MetamorphicRelation::multiply(2).validate());
  EXPECT_THROW(MetamorphicRelation::multiply(0).validate(), InvalidArgument);
  EXPECT_THROW(MetamorphicRelation::shift(0).validate(), InvalidArgument);
  EXPECT_THROW(MetamorphicRelation::shift(-1).validate({1, 5}), InvalidArgument);
  EXPECT_NO_THROW(MetamorphicRelation::shift(-1).validate({2, 6}));
  EXPECT_THROW(MetamorphicRelation::spaces(1.5).validate(), InvalidArgument);
  EXPECT_THROW(MetamorphicRelation::words(0.1, 0, {}).validate(), InvalidArgument);
}
