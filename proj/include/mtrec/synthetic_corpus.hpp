#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mtrec/dataset.hpp"

namespace mtrec {

struct SyntheticCorpusOptions {
  std::size_t users = 610;
  std::size_t movies = 9000;
  std::size_t min_ratings_per_user = 20;
  std::size_t max_ratings_per_user = 400;
  std::uint64_t seed = 2024;
};

struct SyntheticCorpus {
  MovieCatalog catalog;
  std::vector<RatingEvent> ratings;
};

/// MovieLens-shaped corpus: year-tagged titles (some with an article
/// suffix such as ", The"), MovieLens genre vocabulary, half-star ratings
/// skewed by a per-user genre taste. Deterministic in `seed`.
SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusOptions& options = {});

}  // namespace mtrec
