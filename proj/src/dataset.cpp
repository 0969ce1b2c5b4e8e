#include "mtrec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mtrec/csv.hpp"
#include "mtrec/error.hpp"
#include "mtrec/text.hpp"

namespace mtrec {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

template <typename Int>
Int parse_int(std::string_view field, std::string_view name, std::size_t line) {
  field = text::trim(field);
  Int value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError("malformed " + std::string(name) + " '" + std::string(field) + "'",
                     line);
  }
  return value;
}

double parse_double(std::string_view field, std::string_view name, std::size_t line) {
  field = text::trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw ParseError("malformed " + std::string(name) + " '" + std::string(field) + "'",
                     line);
  }
  return value;
}

std::vector<std::string> split_genres(std::string_view field) {
  std::vector<std::string> genres;
  field = text::trim(field);
  if (field.empty() || field == "(no genres listed)") return genres;
  std::size_t start = 0;
  while (start <= field.size()) {
    const std::size_t bar = field.find('|', start);
    const auto piece = text::trim(field.substr(start, bar == std::string_view::npos
                                                          ? std::string_view::npos
                                                          : bar - start));
    if (!piece.empty()) genres.emplace_back(piece);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return genres;
}

bool item_qualifies(const RatingEvent& event, SelectionPolicy policy) {
  // "liked" keeps ratings strictly above 3 stars (6 half stars).
  return policy == SelectionPolicy::kRecent || event.half_stars > 6;
}

}  // namespace

void MovieCatalog::add(MovieId id, Movie movie) {
  if (id <= 0) throw InvalidArgument("movie id must be positive: " + std::to_string(id));
  movie.title = std::string(text::trim(movie.title));
  if (movie.title.empty()) {
    throw InvalidArgument("empty title for movie " + std::to_string(id));
  }
  if (!entries_.emplace(id, std::move(movie)).second) {
    throw InvalidArgument("duplicate movie id " + std::to_string(id));
  }
}

const Movie* MovieCatalog::find(MovieId id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string_view to_string(SelectionPolicy policy) {
  return policy == SelectionPolicy::kLiked ? "liked" : "recent";
}

SelectionPolicy selection_policy_from_string(std::string_view name) {
  if (name == "liked") return SelectionPolicy::kLiked;
  if (name == "recent") return SelectionPolicy::kRecent;
  throw InvalidArgument("unknown selection policy '" + std::string(name) + "'");
}

MovieCatalog parse_movies(std::string_view csv_text) {
  const auto records = csv::parse(csv_text);
  if (records.empty()) throw ParseError("missing header", 1);
  const auto& header = records.front();
  if (header.fields.empty() || text::trim(header.fields[0]) != "movieId") {
    throw ParseError("header must start with movieId", header.line);
  }
  MovieCatalog catalog;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != 3) {
      throw ParseError("expected 3 fields, found " + std::to_string(rec.fields.size()),
                       rec.line);
    }
    const auto id = parse_int<MovieId>(rec.fields[0], "movieId", rec.line);
    try {
      catalog.add(id, Movie{rec.fields[1], split_genres(rec.fields[2])});
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), rec.line);
    }
  }
  return catalog;
}

MovieCatalog load_movies(const std::filesystem::path& path) {
  return parse_movies(read_file(path));
}

std::string serialize_movies(const MovieCatalog& catalog) {
  std::string out = "movieId,title,genres\n";
  for (const auto& [id, movie] : catalog.entries()) {
    out += std::to_string(id);
    out += ',';
    out += csv::escape(movie.title);
    out += ',';
    out += csv::escape(movie.genres.empty() ? std::string("(no genres listed)")
                                            : text::join(movie.genres, "|"));
    out += '\n';
  }
  return out;
}

void write_movies(const MovieCatalog& catalog, const std::filesystem::path& path) {
  write_file(path, serialize_movies(catalog));
}

std::vector<RatingEvent> parse_ratings(std::string_view csv_text) {
  const auto records = csv::parse(csv_text);
  if (records.empty()) throw ParseError("missing header", 1);
  const auto& header = records.front();
  const std::vector<std::string> expected{"userId", "movieId", "rating", "timestamp"};
  bool header_ok = header.fields.size() == expected.size();
  for (std::size_t i = 0; header_ok && i < expected.size(); ++i) {
    header_ok = text::trim(header.fields[i]) == expected[i];
  }
  if (!header_ok) {
    throw ParseError("header must be userId,movieId,rating,timestamp", header.line);
  }
  std::vector<RatingEvent> events;
  events.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != 4) {
      throw ParseError("expected 4 fields, found " + std::to_string(rec.fields.size()),
                       rec.line);
    }
    RatingEvent event;
    event.user_id = parse_int<UserId>(rec.fields[0], "userId", rec.line);
    event.movie_id = parse_int<MovieId>(rec.fields[1], "movieId", rec.line);
    const double rating = parse_double(rec.fields[2], "rating", rec.line);
    event.timestamp = parse_int<std::int64_t>(rec.fields[3], "timestamp", rec.line);
    const double doubled = rating * 2.0;
    if (rating < 0.5 || rating > 5.0 || doubled != std::floor(doubled)) {
      throw ParseError("rating " + std::string(text::trim(rec.fields[2])) +
                           " is not on the half-star grid 0.5..5.0",
                       rec.line);
    }
    if (event.user_id <= 0 || event.movie_id <= 0) {
      throw ParseError("ids must be positive", rec.line);
    }
    event.half_stars = static_cast<int>(doubled);
    events.push_back(event);
  }
  return events;
}

std::vector<RatingEvent> load_ratings(const std::filesystem::path& path) {
  return parse_ratings(read_file(path));
}

void write_ratings(const std::vector<RatingEvent>& events,
                   const std::filesystem::path& path) {
  std::string out = "userId,movieId,rating,timestamp\n";
  for (const auto& e : events) {
    out += std::to_string(e.user_id);
    out += ',';
    out += std::to_string(e.movie_id);
    out += ',';
    out += std::to_string(e.half_stars / 2);
    out += e.half_stars % 2 == 0 ? ".0" : ".5";
    out += ',';
    out += std::to_string(e.timestamp);
    out += '\n';
  }
  write_file(path, out);
}

HistoryIndex build_histories(const std::vector<RatingEvent>& events,
                             const MovieCatalog& catalog) {
  HistoryIndex index;
  for (const auto& e : events) {
    if (catalog.find(e.movie_id) == nullptr) {
      ++index.dropped_events;
      continue;
    }
    index.by_user[e.user_id].push_back(e);
  }
  for (auto& [user, list] : index.by_user) {
    std::sort(list.begin(), list.end(), [](const RatingEvent& a, const RatingEvent& b) {
      if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
      return a.movie_id < b.movie_id;
    });
  }
  return index;
}

int half_stars_to_numerator(int half_stars) noexcept { return (half_stars + 1) / 2; }

SelectionResult select_history(UserId user_id,
                               const std::vector<RatingEvent>& user_events,
                               const MovieCatalog& catalog, std::size_t l,
                               SelectionPolicy policy) {
  if (l < 1) throw InvalidArgument("l must be at least 1");
  SelectionResult result;
  result.history.user_id = user_id;
  for (const auto& e : user_events) {
    if (result.history.items.size() == l) break;
    if (!item_qualifies(e, policy)) continue;
    const Movie* movie = catalog.find(e.movie_id);
    if (movie == nullptr) continue;
    result.history.items.push_back(
        RatedItem{movie->title, half_stars_to_numerator(e.half_stars), kOriginalScale});
  }
  result.eligible = result.history.items.size() == l;
  return result;
}

SelectionResult select_all(UserId user_id, const std::vector<RatingEvent>& user_events,
                           const MovieCatalog& catalog, SelectionPolicy policy) {
  auto result = select_history(user_id, user_events, catalog,
                               std::max<std::size_t>(user_events.size(), 1), policy);
  result.eligible = !result.history.items.empty();
  return result;
}

}  // namespace mtrec
