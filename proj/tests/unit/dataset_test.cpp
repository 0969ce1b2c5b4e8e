#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "mtrec/dataset.hpp"
#include "mtrec/error.hpp"

using namespace mtrec;

namespace {

const std::filesystem::path kData = MTREC_TEST_DATA_DIR;

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("mtrec_dataset_" + name);
  std::ofstream(path, std::ios::binary) << body;
  return path;
}

std::vector<RatingEvent> events_for(UserId user, std::initializer_list<std::pair<MovieId, int>> rows) {
  std::vector<RatingEvent> out;
  std::int64_t t = 1000;
  for (const auto& [movie, half] : rows) out.push_back(RatingEvent{user, movie, half, t--});
  return out;
}

}  // namespace

TEST(LoadMovies, TwoRows) {
  const auto catalog = parse_movies("movieId,title,genres\n1,A (1990),Drama\n2,B (1991),Comedy|Drama\n");
  EXPECT_EQ(catalog.size(), 2u);
  EXPECT_EQ(catalog.find(2)->genres, (std::vector<std::string>{"Comedy", "Drama"}));
}

TEST(LoadMovies, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(parse_movies("movieId,title,genres\n").empty());
}

TEST(LoadMovies, QuotedTitleWithComma) {
  const auto catalog = parse_movies("movieId,title,genres\n1,\"Dukes of Hazzard, The (2005)\",Comedy\n");
  EXPECT_EQ(catalog.find(1)->title, "Dukes of Hazzard, The (2005)");
}

TEST(LoadMovies, NoGenresListedMapsToEmpty) {
  const auto catalog = load_movies(kData / "movies.csv");
  EXPECT_TRUE(catalog.find(176601)->genres.empty());
  EXPECT_EQ(catalog.find(4973)->title, "Amélie (Fabuleux destin d'Amélie Poulain, Le) (2001)");
}

TEST(LoadMovies, Errors) {
  EXPECT_THROW(parse_movies("title,movieId\n"), ParseError);
  EXPECT_THROW(parse_movies("movieId,title,genres\n1,A,Drama\n1,B,Drama\n"), ParseError);
  try {
    parse_movies("movieId,title,genres\n1,A,Drama\nx,B,Drama\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load_movies("/nonexistent/movies.csv"), IoError);
}

TEST(LoadMovies, RoundTrip) {
  const auto catalog = load_movies(kData / "movies.csv");
  EXPECT_EQ(parse_movies(serialize_movies(catalog)), catalog);
  const auto path = std::filesystem::temp_directory_path() / "mtrec_roundtrip_movies.csv";
  write_movies(catalog, path);
  EXPECT_EQ(load_movies(path), catalog);
}

TEST(LoadRatings, FieldMapping) {
  const auto events = parse_ratings("userId,movieId,rating,timestamp\n509,1,2.0,964982703\n");
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].user_id, 509);
  EXPECT_EQ(events[0].movie_id, 1);
  EXPECT_DOUBLE_EQ(events[0].rating(), 2.0);
  EXPECT_EQ(events[0].timestamp, 964982703);
}

TEST(LoadRatings, OffGridReportsValueAndLine) {
  try {
    parse_ratings("userId,movieId,rating,timestamp\n1,1,4.0,1\n1,2,6.0,2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("6.0"), std::string::npos);
  }
  EXPECT_THROW(parse_ratings("userId,movieId,rating,timestamp\n1,1,3.25,1\n"), ParseError);
  EXPECT_THROW(parse_ratings("userId,movieId,rating,timestamp\n1,1,0.0,1\n"), ParseError);
  EXPECT_THROW(parse_ratings("userId,movieId,rating,timestamp\n1,x,4.0,1\n"), ParseError);
  EXPECT_THROW(parse_ratings("user,movie,rating,timestamp\n"), ParseError);
}

TEST(LoadFiles, CrLfLineEndings) {
  const auto movies = temp_file("crlf_movies.csv",
                                "movieId,title,genres\r\n1,\"Heat, The (1995)\",Action|Crime\r\n");
  const auto ratings = temp_file("crlf_ratings.csv", "userId,movieId,rating,timestamp\r\n3,1,4.5,10\r\n");
  const auto catalog = load_movies(movies);
  ASSERT_EQ(catalog.size(), 1u);
  EXPECT_EQ(catalog.find(1)->title, "Heat, The (1995)");
  const auto events = load_ratings(ratings);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_DOUBLE_EQ(events[0].rating(), 4.5);
}

TEST(LoadRatings, WriteRoundTrip) {
  const auto events = load_ratings(kData / "ratings.csv");
  const auto path = std::filesystem::temp_directory_path() / "mtrec_roundtrip_ratings.csv";
  write_ratings(events, path);
  EXPECT_EQ(load_ratings(path), events);
}

TEST(BuildHistories, OrderAndTieBreak) {
  MovieCatalog catalog;
  for (MovieId id : {1, 3, 5}) catalog.add(id, Movie{"M" + std::to_string(id), {}});
  const std::vector<RatingEvent> events = {
      {7, 1, 8, 10}, {7, 1, 8, 20}, {8, 5, 8, 30}, {8, 3, 8, 30}, {9, 42, 8, 1}};
  const auto index = build_histories(events, catalog);
  ASSERT_EQ(index.by_user.at(7).size(), 2u);
  EXPECT_EQ(index.by_user.at(7)[0].timestamp, 20);
  EXPECT_EQ(index.by_user.at(8)[0].movie_id, 3);
  EXPECT_EQ(index.by_user.at(8)[1].movie_id, 5);
  EXPECT_EQ(index.by_user.count(9), 0u);  // only event was unresolvable
  EXPECT_EQ(index.by_user.count(10), 0u);
  EXPECT_EQ(index.dropped_events, 1u);
}

TEST(BuildHistories, FixtureUser509MatchesWorkedOrder) {
  const auto catalog = load_movies(kData / "movies.csv");
  const auto index = build_histories(load_ratings(kData / "ratings.csv"), catalog);
  EXPECT_EQ(index.dropped_events, 1u);
  const auto sel = select_history(509, index.by_user.at(509), catalog, 5, SelectionPolicy::kRecent);
  ASSERT_TRUE(sel.eligible);
  const std::vector<std::pair<std::string, int>> expected = {
      {"Dukes of Hazzard, The (2005)", 2}, {"Miss Congeniality (2000)", 3}, {"Click (2006)", 1},
      {"Ultraviolet (2006)", 2}, {"Monty Python and the Holy Grail (1975)", 4}};
  ASSERT_EQ(sel.history.items.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(sel.history.items[i].title, expected[i].first);
    EXPECT_EQ(sel.history.items[i].rating_numerator, expected[i].second);
  }
}

TEST(SelectHistory, LikedKeepsAboveThree) {
  MovieCatalog catalog;
  for (MovieId id : {1, 2, 3}) catalog.add(id, Movie{"M" + std::to_string(id), {}});
  const auto events = events_for(1, {{1, 4}, {2, 8}, {3, 10}});  // 2.0, 4.0, 5.0
  const auto sel = select_all(1, events, catalog, SelectionPolicy::kLiked);
  ASSERT_EQ(sel.history.items.size(), 2u);
  EXPECT_EQ(sel.history.items[0].rating_numerator, 4);
  EXPECT_EQ(sel.history.items[1].rating_numerator, 5);
  EXPECT_FALSE(select_history(1, events, catalog, 3, SelectionPolicy::kLiked).eligible);
  // 3.0 is not "greater than 3" and 3.5 is.
  EXPECT_TRUE(select_all(1, events_for(1, {{1, 7}}), catalog, SelectionPolicy::kLiked).eligible);
  EXPECT_FALSE(select_all(1, events_for(1, {{1, 6}}), catalog, SelectionPolicy::kLiked).eligible);
}

TEST(SelectHistory, RecentTakesPrefix) {
  MovieCatalog catalog;
  std::vector<RatingEvent> events;
  for (MovieId id = 1; id <= 20; ++id) {
    catalog.add(id, Movie{"M" + std::to_string(id), {}});
    events.push_back(RatingEvent{1, id, 2, 100 - id});
  }
  const auto index = build_histories(events, catalog);
  const auto sel = select_history(1, index.by_user.at(1), catalog, 5, SelectionPolicy::kRecent);
  ASSERT_EQ(sel.history.items.size(), 5u);
  EXPECT_EQ(sel.history.items.front().title, "M1");
  EXPECT_EQ(sel.history.items.back().title, "M5");
  EXPECT_FALSE(select_history(1, index.by_user.at(1), catalog, 21, SelectionPolicy::kRecent).eligible);
  EXPECT_THROW(select_history(1, index.by_user.at(1), catalog, 0, SelectionPolicy::kRecent),
               InvalidArgument);
}

TEST(SelectHistory, HalfStarsRoundHalfUp) {
  EXPECT_EQ(half_stars_to_numerator(7), 4);  // 3.5
  EXPECT_EQ(half_stars_to_numerator(1), 1);  // 0.5
  EXPECT_EQ(half_stars_to_numerator(2), 1);
  EXPECT_EQ(half_stars_to_numerator(9), 5);  // 4.5
  EXPECT_EQ(half_stars_to_numerator(10), 5);
}

TEST(SelectHistory, PolicyNames) {
  EXPECT_EQ(selection_policy_from_string(to_string(SelectionPolicy::kLiked)), SelectionPolicy::kLiked);
  EXPECT_EQ(selection_policy_from_string("recent"), SelectionPolicy::kRecent);
  EXPECT_THROW(selection_policy_from_string("best"), InvalidArgument);
}

TEST(MovieCatalog, Invariants) {
  MovieCatalog catalog;
  catalog.add(1, Movie{"A", {}});
  EXPECT_THROW(catalog.add(1, Movie{"B", {}}), InvalidArgument);
  EXPECT_THROW(catalog.add(0, Movie{"C", {}}), InvalidArgument);
  EXPECT_THROW(catalog.add(2, Movie{"   ", {}}), InvalidArgument);
}
