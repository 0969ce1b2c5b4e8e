#include "mtrec/synthetic_corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>
#include <unordered_set>

#include <fmt/format.h>

#include "mtrec/error.hpp"
#include "mtrec/random.hpp"

namespace mtrec {
namespace {

constexpr std::array<const char*, 19> kGenres = {
    "Action",   "Adventure", "Animation", "Children", "Comedy",  "Crime",  "Documentary",
    "Drama",    "Fantasy",   "Film-Noir", "Horror",   "IMAX",    "Musical", "Mystery",
    "Romance",  "Sci-Fi",    "Thriller",  "War",      "Western"};

// Rough MovieLens genre frequencies, so Drama and Comedy dominate.
constexpr std::array<double, 19> kGenreWeights = {
    18, 12, 6, 6, 39, 13, 4, 44, 8, 1, 10, 2, 4, 6, 16, 10, 20, 4, 2};

constexpr std::array<const char*, 40> kAdjectives = {
    "Silent",  "Broken",  "Golden",  "Last",    "Hidden",  "Wild",     "Dark",    "Lost",
    "Crimson", "Endless", "Frozen",  "Little",  "Secret",  "Burning",  "Electric", "Quiet",
    "Savage",  "Bright",  "Hollow",  "Lonely",  "Midnight", "Iron",    "Parchment","Velvet",
    "Distant", "Restless", "Sweet",  "Bitter",  "Wicked",  "Gentle",   "Final",   "Strange",
    "Blue",    "Empty",   "Fallen",  "Shining", "Rising",  "Stolen",   "Naked",   "Perfect"};

constexpr std::array<const char*, 48> kNouns = {
    "Road",     "River",   "City",    "Garden",  "Kingdom", "Heart",   "Summer",  "Winter",
    "Machine",  "Stranger", "Island", "Mirror",  "Empire",  "Voyage",  "Shadow",  "Harbor",
    "Detective", "Witness", "Horizon", "Circus",  "Castle",  "Dream",   "Storm",   "Promise",
    "Frontier", "Affair",  "Journey", "Station", "Letter",  "Game",    "Planet",  "Hotel",
    "Season",   "Ghost",   "Valley",  "Thief",   "Dance",   "Bridge",  "Forest",  "Tower",
    "Engine",   "Canyon",  "Secret",  "Saint",   "Wedding", "Prophet", "Orchard", "Signal"};

constexpr std::array<const char*, 6> kForeign = {
    "Amélie", "Léon", "Señorita", "Nausicaä", "Crème", "Über"};

constexpr std::array<const char*, 3> kArticles = {"The", "A", "An"};

std::size_t pick_weighted(Rng& rng, const double* weights, std::size_t n) {
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) total += weights[i];
  double r = rng.uniform01() * total;
  for (std::size_t i = 0; i < n; ++i) {
    if (r < weights[i]) return i;
    r -= weights[i];
  }
  return n - 1;
}

std::string make_base_title(Rng& rng) {
  const std::string adjective = kAdjectives[rng.below(kAdjectives.size())];
  const std::string noun = kNouns[rng.below(kNouns.size())];
  const double shape = rng.uniform01();
  if (shape < 0.08) return std::string(kForeign[rng.below(kForeign.size())]) + " " + noun;
  if (shape < 0.14) return "\"" + adjective + " " + noun + "\"";
  if (shape < 0.22) return adjective + " " + noun + ", " + kNouns[rng.below(kNouns.size())];
  if (shape < 0.30) return noun + " of the " + adjective + " " + kNouns[rng.below(kNouns.size())];
  return adjective + " " + noun;
}

std::string make_title(Rng& rng, std::unordered_set<std::string>& used) {
  std::string base = make_base_title(rng);
  if (rng.bernoulli(0.18)) base += std::string(", ") + kArticles[rng.below(kArticles.size())];
  const int year = 1920 + static_cast<int>(rng.below(99));
  std::string title = fmt::format("{} ({})", base, year);
  for (int sequel = 2; used.count(title) != 0; ++sequel) {
    title = fmt::format("{} {} ({})", base, sequel, year);
  }
  used.insert(title);
  return title;
}

std::vector<std::string> make_genres(Rng& rng) {
  if (rng.bernoulli(0.005)) return {};  // "(no genres listed)"
  const std::size_t count = 1 + pick_weighted(rng, std::array<double, 4>{40, 35, 18, 7}.data(), 4);
  std::set<std::size_t> chosen;
  while (chosen.size() < count) chosen.insert(pick_weighted(rng, kGenreWeights.data(), 19));
  std::vector<std::string> genres;
  for (auto g : chosen) genres.emplace_back(kGenres[g]);  // alphabetical, like MovieLens
  return genres;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusOptions& options) {
  if (options.users == 0 || options.movies == 0) {
    throw InvalidArgument("synthetic corpus needs users and movies");
  }
  if (options.min_ratings_per_user < 1 ||
      options.min_ratings_per_user > options.max_ratings_per_user ||
      options.max_ratings_per_user > options.movies) {
    throw InvalidArgument("bad ratings-per-user bounds");
  }

  SyntheticCorpus corpus;
  Rng movie_rng(derive_seed(options.seed, 0, 1, 0));
  std::unordered_set<std::string> used;
  std::vector<std::uint32_t> masks;
  std::vector<double> quality;
  masks.reserve(options.movies);
  for (std::size_t i = 0; i < options.movies; ++i) {
    Movie movie{make_title(movie_rng, used), make_genres(movie_rng)};
    std::uint32_t mask = 0;
    for (const auto& g : movie.genres) {
      mask |= 1U << (std::find(kGenres.begin(), kGenres.end(), g) - kGenres.begin());
    }
    masks.push_back(mask);
    quality.push_back(movie_rng.uniform(-0.8, 0.8));
    // Sparse ids, like MovieLens.
    corpus.catalog.add(static_cast<MovieId>(i * 3 + 1 + (i % 7 == 0 ? 1 : 0)), std::move(movie));
  }
  std::vector<MovieId> ids;
  ids.reserve(options.movies);
  for (const auto& [id, movie] : corpus.catalog.entries()) ids.push_back(id);

  for (std::size_t u = 1; u <= options.users; ++u) {
    Rng rng(derive_seed(options.seed, u, 2, 0));
    std::uint32_t taste = 0;
    const std::size_t favourites = 2 + rng.below(2);
    while (static_cast<std::size_t>(__builtin_popcount(taste)) < favourites) {
      taste |= 1U << pick_weighted(rng, kGenreWeights.data(), 19);
    }
    const double generosity = rng.uniform(-0.6, 0.6);
    const double span =
        static_cast<double>(options.max_ratings_per_user - options.min_ratings_per_user);
    const auto count = options.min_ratings_per_user +
                       static_cast<std::size_t>(std::floor(span * std::pow(rng.uniform01(), 3)));

    std::set<std::size_t> seen;
    std::int64_t timestamp = 946684800 + static_cast<std::int64_t>(rng.below(500'000'000));
    while (seen.size() < count) {
      // Popularity skew: low indices are drawn far more often.
      const auto index = static_cast<std::size_t>(
          std::floor(std::pow(rng.uniform01(), 2.2) * static_cast<double>(options.movies)));
      if (!seen.insert(index).second) continue;
      const int shared = __builtin_popcount(masks[index] & taste);
      const double score = 3.0 + generosity + quality[index] + 0.6 * shared - 0.4 +
                           rng.uniform(-1.2, 1.2);
      const int half_stars = std::clamp(static_cast<int>(std::lround(score * 2)), 1, 10);
      timestamp += 1 + static_cast<std::int64_t>(rng.below(86'400 * 3));
      corpus.ratings.push_back(RatingEvent{static_cast<UserId>(u), ids[index], half_stars,
                                           timestamp});
    }
  }
  return corpus;
}

}  // namespace mtrec
