#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtrec/dataset.hpp"
#include "mtrec/prompt.hpp"

namespace mtrec {

inline const std::vector<std::string> kDefaultVocabulary = {"apple", "grape",
                                                            "banana", "pear"};

/// Parameters of one metamorphic relation. Only the fields relevant to
/// `kind` are read.
struct MetamorphicRelation {
  MrKind kind = MrKind::kMr1;
  int lambda = 2;
  double space_prob = 0.3;
  double word_prob = 0.1;
  std::vector<std::string> vocabulary = kDefaultVocabulary;
  std::uint64_t seed = 0;

  static MetamorphicRelation multiply(int lambda = 2);
  static MetamorphicRelation shift(int lambda = 1);
  static MetamorphicRelation spaces(double space_prob = 0.3, std::uint64_t seed = 0);
  static MetamorphicRelation words(double word_prob = 0.1, std::uint64_t seed = 0,
                                   std::vector<std::string> vocabulary = kDefaultVocabulary);

  /// Throws InvalidArgument when the parameters violate the relation's
  /// invariants for a source prompt on `scale`.
  void validate(const RatingScale& scale = kOriginalScale) const;
};

/// R/max -> (lambda*R)/(lambda*max). Requires lambda >= 1.
std::pair<int, RatingScale> mr1_scale_rating(int numerator, const RatingScale& scale,
                                             int lambda);

/// R/max -> (R+lambda)/(max+lambda). Requires scale.min + lambda >= 1.
std::pair<int, RatingScale> mr2_shift_rating(int numerator, const RatingScale& scale,
                                             int lambda);

/// Inserts one space into each gap between adjacent non-whitespace code
/// points with probability `space_prob`.
std::string mr3_insert_spaces(std::string_view text, double space_prob,
                              std::uint64_t seed);

/// Inserts one vocabulary word into each gap between space-separated tokens
/// with probability `word_prob`.
std::string mr4_insert_words(std::string_view text, double word_prob,
                             const std::vector<std::string>& vocabulary,
                             std::uint64_t seed);

/// Builds the follow-up prompt of `source` under `relation`. MR1/MR2
/// transform `history` and re-render; MR3/MR4 perturb the source text.
/// `options` must be the options the source was rendered with.
Prompt derive_followup(const UserHistory& history, const Prompt& source,
                       const MetamorphicRelation& relation,
                       const PromptOptions& options = {});

}  // namespace mtrec
