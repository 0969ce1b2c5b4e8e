#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mtrec {

using MovieId = std::int64_t;
using UserId = std::int64_t;

struct Movie {
  std::string title;
  std::vector<std::string> genres;

  bool operator==(const Movie&) const = default;
};

/// Movies keyed by id. Titles are non-empty after trimming.
class MovieCatalog {
 public:
  MovieCatalog() = default;

  /// Throws InvalidArgument on a non-positive or duplicate id, or a blank title.
  void add(MovieId id, Movie movie);

  const Movie* find(MovieId id) const;
  const std::map<MovieId, Movie>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  bool operator==(const MovieCatalog&) const = default;

 private:
  std::map<MovieId, Movie> entries_;
};

/// Integer rating scale rendered as "(min being lowest and max being highest )".
struct RatingScale {
  int min = 1;
  int max = 5;

  bool contains(int numerator) const noexcept {
    return numerator >= min && numerator <= max;
  }
  bool operator==(const RatingScale&) const = default;
};

/// The scale of the source prompt.
inline constexpr RatingScale kOriginalScale{1, 5};

/// One row of ratings.csv. Ratings sit on the half-star grid and are stored
/// as a count of half stars (1..10) so that comparisons stay exact.
struct RatingEvent {
  UserId user_id = 0;
  MovieId movie_id = 0;
  int half_stars = 0;
  std::int64_t timestamp = 0;

  double rating() const noexcept { return half_stars / 2.0; }
  bool operator==(const RatingEvent&) const = default;
};

struct RatedItem {
  std::string title;
  int rating_numerator = 0;
  RatingScale scale;

  bool operator==(const RatedItem&) const = default;
};

/// The rated items of one user that go into a prompt.
struct UserHistory {
  UserId user_id = 0;
  std::vector<RatedItem> items;

  bool operator==(const UserHistory&) const = default;
};

enum class SelectionPolicy {
  kLiked,   // ratings strictly above 3 only
  kRecent,  // most recent events regardless of rating
};

std::string_view to_string(SelectionPolicy policy);
SelectionPolicy selection_policy_from_string(std::string_view name);

struct SelectionResult {
  UserHistory history;
  /// False when fewer than the requested number of items qualified.
  bool eligible = false;
};

/// Per-user events, most recent first, plus the number of events dropped
/// because their movie id is not in the catalog.
struct HistoryIndex {
  std::map<UserId, std::vector<RatingEvent>> by_user;
  std::size_t dropped_events = 0;
};

MovieCatalog load_movies(const std::filesystem::path& path);
MovieCatalog parse_movies(std::string_view csv_text);

/// Writes `movies.csv` in the same layout `load_movies` reads.
void write_movies(const MovieCatalog& catalog, const std::filesystem::path& path);
std::string serialize_movies(const MovieCatalog& catalog);

std::vector<RatingEvent> load_ratings(const std::filesystem::path& path);
std::vector<RatingEvent> parse_ratings(std::string_view csv_text);

void write_ratings(const std::vector<RatingEvent>& events,
                   const std::filesystem::path& path);

/// Groups events by user, ordered by (timestamp desc, movie id asc).
HistoryIndex build_histories(const std::vector<RatingEvent>& events,
                             const MovieCatalog& catalog);

/// Maps half stars onto the (1,5) integer scale, rounding half up.
int half_stars_to_numerator(int half_stars) noexcept;

/// Picks at most `l` items from `user_events` (already in history order).
/// Throws InvalidArgument when l < 1.
SelectionResult select_history(UserId user_id,
                               const std::vector<RatingEvent>& user_events,
                               const MovieCatalog& catalog, std::size_t l,
                               SelectionPolicy policy);

/// Every item that passes `policy`; eligible when at least one qualifies.
SelectionResult select_all(UserId user_id,
                           const std::vector<RatingEvent>& user_events,
                           const MovieCatalog& catalog, SelectionPolicy policy);

}  // namespace mtrec
