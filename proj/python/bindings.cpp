#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mtrec/error.hpp"
#include "mtrec/experiment.hpp"
#include "mtrec/mock_recommender.hpp"
#include "mtrec/synthetic_corpus.hpp"

namespace py = pybind11;
using namespace mtrec;

namespace {

using Items = std::vector<std::pair<std::string, int>>;

UserHistory make_history(UserId user, const Items& items, const RatingScale& scale) {
  UserHistory history{user, {}};
  for (const auto& [title, rating] : items) history.items.push_back(RatedItem{title, rating, scale});
  return history;
}

MetamorphicRelation make_relation(const std::string& kind, std::optional<int> lambda,
                                  std::optional<double> prob, std::uint64_t seed) {
  switch (mr_kind_from_string(kind)) {
    case MrKind::kMr1: return MetamorphicRelation::multiply(lambda.value_or(2));
    case MrKind::kMr2: return MetamorphicRelation::shift(lambda.value_or(1));
    case MrKind::kMr3: return MetamorphicRelation::spaces(prob.value_or(0.3), seed);
    case MrKind::kMr4: return MetamorphicRelation::words(prob.value_or(0.1), seed);
  }
  throw InvalidArgument("unknown relation " + kind);
}

py::tuple t_result(const TTestResult& r) { return py::make_tuple(r.t, r.df, r.p_two_tailed); }

}  // namespace

PYBIND11_MODULE(_mtrec, m) {
  m.doc() = "Metamorphic testing harness for LLM-based recommenders";

  auto error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<MissingRecording>(m, "MissingRecording", error.ptr());

  py::class_<TTestResult>(m, "TTestResult")
      .def_readonly("t", &TTestResult::t)
      .def_readonly("df", &TTestResult::df)
      .def_readonly("p", &TTestResult::p_two_tailed);

  m.def(
      "render_prompt",
      [](UserId user, const Items& items, std::size_t k, std::pair<int, int> scale,
         bool format_suffix) {
        const RatingScale s{scale.first, scale.second};
        return render_prompt(make_history(user, items, s), s, k, {format_suffix, std::nullopt})
            .text;
      },
      py::arg("user_id"), py::arg("items"), py::arg("k"), py::arg("scale") = std::pair{1, 5},
      py::arg("format_suffix") = true,
      "Render the recommendation prompt for (title, rating) items.");

  m.def(
      "apply_relation",
      [](const std::string& kind, UserId user, const Items& items, std::size_t k,
         std::optional<int> lambda, std::optional<double> prob, std::uint64_t seed,
         bool format_suffix) {
        const PromptOptions options{format_suffix, std::nullopt};
        const auto history = make_history(user, items, kOriginalScale);
        const auto source = render_prompt(history, kOriginalScale, k, options);
        return derive_followup(history, source, make_relation(kind, lambda, prob, seed), options)
            .text;
      },
      py::arg("kind"), py::arg("user_id"), py::arg("items"), py::arg("k"),
      py::arg("lam") = py::none(), py::arg("prob") = py::none(), py::arg("seed") = 0,
      py::arg("format_suffix") = true,
      "Follow-up prompt of MR1..MR4 for a (1,5)-scale history.");

  m.def(
      "parse_recommendations",
      [](const std::string& text, std::size_t k) {
        std::vector<std::string> titles;
        for (const auto& item : parse_recommendations(text, k).items) titles.push_back(item.display);
        return titles;
      },
      py::arg("text"), py::arg("k"));

  m.def(
      "kendall_tau",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b,
         const std::string& mode) { return kendall_tau(a, b, kendall_mode_from_string(mode)); },
      py::arg("a"), py::arg("b"), py::arg("mode") = "union_tied");
  m.def("rbo_ext",
        py::overload_cast<const std::vector<std::string>&, const std::vector<std::string>&,
                          double>(&rbo_ext),
        py::arg("a"), py::arg("b"), py::arg("p") = 0.9);
  m.def("overlap_ratio",
        py::overload_cast<const std::vector<std::string>&, const std::vector<std::string>&,
                          std::size_t>(&overlap_ratio),
        py::arg("a"), py::arg("b"), py::arg("k"));

  m.def("welch_t_test", [](const std::vector<double>& x, const std::vector<double>& y) {
    return welch_t_test(x, y);
  });
  m.def("pooled_t_test", [](const std::vector<double>& x, const std::vector<double>& y) {
    return pooled_t_test(x, y);
  });
  m.def("t_cdf", &t_cdf, py::arg("t"), py::arg("df"));

  m.def(
      "mock_recommend",
      [](const std::string& prompt, const std::string& movies_csv, double noise,
         std::uint64_t seed) { return mock_recommend(prompt, noise, seed, parse_movies(movies_csv)); },
      py::arg("prompt"), py::arg("movies_csv"), py::arg("noise") = 0.0, py::arg("seed") = 0,
      "Answer a prompt with the deterministic mock recommender.");

  m.def(
      "synthetic_corpus",
      [](const std::string& out_dir, std::size_t users, std::size_t movies, std::uint64_t seed) {
        SyntheticCorpusOptions options;
        options.users = users;
        options.movies = movies;
        options.seed = seed;
        const auto corpus = generate_synthetic_corpus(options);
        std::filesystem::create_directories(out_dir);
        write_movies(corpus.catalog, std::filesystem::path(out_dir) / "movies.csv");
        write_ratings(corpus.ratings, std::filesystem::path(out_dir) / "ratings.csv");
      },
      py::arg("out_dir"), py::arg("users") = 610, py::arg("movies") = 9000,
      py::arg("seed") = 2024, "Write a synthetic movies.csv / ratings.csv pair.");

  m.def(
      "run_experiment",
      [](const std::string& protocol, const std::string& config_json) {
        const Protocol p = protocol_from_string(protocol);
        const auto config = nlohmann::json::parse(config_json);
        const ExperimentPlan plan = plan_from_json(config, ExperimentPlan::defaults(p));
        Report report;
        {
          py::gil_scoped_release release;
          report = mtrec::run_experiment(plan);
        }
        py::dict out;
        out["markdown"] = render_markdown(report);
        out["csv"] = render_csv(report);
        py::list rows;
        for (const auto& row : report.rows) {
          py::dict r;
          r["group"] = row.group;
          r["kendall"] = row.kendall.mean;
          r["rbo"] = row.rbo.mean;
          r["overlap"] = row.overlap.mean;
          r["n"] = row.kendall.n;
          rows.append(r);
        }
        out["rows"] = rows;
        return out;
      },
      py::arg("protocol"), py::arg("config_json"),
      "Run sweep_k, sweep_l or mr_eval from a JSON config; returns rendered reports and rows.");
}
