// mtrec: run the k-sweep, l-sweep and MR evaluation protocols, or re-render a
// report from a stored runs.jsonl.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mtrec/dataset.hpp"
#include "mtrec/error.hpp"
#include "mtrec/experiment.hpp"
#include "mtrec/synthetic_corpus.hpp"

namespace {

using namespace mtrec;

// Flags shared by the three protocol subcommands. Unset optionals leave the
// config file (or protocol default) value in place.
struct RunFlags {
  std::string config;
  std::optional<std::string> provider;
  std::optional<std::string> cache;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> users;
  std::vector<std::size_t> k;
  std::vector<std::size_t> l;
  std::optional<std::size_t> iterations;
  std::optional<int> lambda_mr1;
  std::optional<int> lambda_mr2;
  std::optional<double> space_prob;
  std::optional<double> word_prob;
  std::optional<double> noise;
  std::optional<std::string> movies;
  std::optional<std::string> ratings;
  std::optional<int> jobs;
  bool strict_replay = false;
  bool freeze_perturbation = false;
  std::string out = "out";
  std::vector<std::string> formats;
};

void add_output_flags(CLI::App* cmd, std::string& out, std::vector<std::string>& formats) {
  cmd->add_option("--out", out, "Output directory")->capture_default_str();
  cmd->add_option("--format", formats, "csv, markdown or jsonl (repeatable; default all)")
      ->check(CLI::IsMember({"csv", "markdown", "md", "jsonl"}))
      ->delimiter(',');
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file; flags override it")
      ->check(CLI::ExistingFile);
  cmd->add_option("--provider", f.provider, "remote, mock or replay")
      ->check(CLI::IsMember({"remote", "mock", "replay"}));
  cmd->add_option("--cache", f.cache, "Response cache (JSONL)");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--users", f.users, "Sample size, or 'all'");
  cmd->add_option("--k", f.k, "Recommendation list length(s)")->delimiter(',');
  cmd->add_option("--l", f.l, "Items per prompt")->delimiter(',');
  cmd->add_option("--iterations", f.iterations, "Iterations per user");
  cmd->add_option("--lambda-mr1", f.lambda_mr1, "MR1 multiplier");
  cmd->add_option("--lambda-mr2", f.lambda_mr2, "MR2 shift");
  cmd->add_option("--space-prob", f.space_prob, "MR3 per-gap space probability");
  cmd->add_option("--word-prob", f.word_prob, "MR4 per-gap word probability");
  cmd->add_option("--noise", f.noise, "Mock provider swap probability");
  cmd->add_option("--movies", f.movies, "movies.csv path");
  cmd->add_option("--ratings", f.ratings, "ratings.csv path");
  cmd->add_option("--jobs", f.jobs, "Concurrent requests");
  cmd->add_flag("--strict-replay", f.strict_replay, "Abort on a replay cache miss");
  cmd->add_flag("--freeze-perturbation", f.freeze_perturbation,
                "Reuse one MR3/MR4 perturbation per user across iterations");
  add_output_flags(cmd, f.out, f.formats);
}

ExperimentPlan resolve_plan(Protocol protocol, const RunFlags& f) {
  ExperimentPlan plan = f.config.empty() ? ExperimentPlan::defaults(protocol)
                                         : load_plan(f.config, protocol);
  if (f.provider) plan.provider.kind = provider_kind_from_string(*f.provider);
  if (f.cache) plan.provider.cache_path = *f.cache;
  if (f.seed) plan.master_seed = *f.seed;
  if (f.users) {
    if (*f.users == "all") {
      plan.users.all_eligible = true;
    } else {
      std::size_t pos = 0;
      unsigned long long n = 0;
      try {
        n = std::stoull(*f.users, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != f.users->size() || n == 0) {
        throw InvalidArgument("--users takes a positive count or 'all'");
      }
      plan.users = UserSample{false, static_cast<std::size_t>(n)};
    }
  }
  if (!f.k.empty()) plan.k_values = f.k;
  if (!f.l.empty()) plan.l_values = f.l;
  if (f.iterations) plan.iterations = *f.iterations;
  if (f.lambda_mr1) plan.relations.lambda_mr1 = *f.lambda_mr1;
  if (f.lambda_mr2) plan.relations.lambda_mr2 = *f.lambda_mr2;
  if (f.space_prob) plan.relations.space_prob = *f.space_prob;
  if (f.word_prob) plan.relations.word_prob = *f.word_prob;
  if (f.noise) plan.provider.mock_noise = *f.noise;
  if (f.movies) plan.movies_path = *f.movies;
  if (f.ratings) plan.ratings_path = *f.ratings;
  if (f.jobs) plan.provider.max_in_flight = *f.jobs;
  if (f.strict_replay) plan.provider.strict_replay = true;
  if (f.freeze_perturbation) plan.relations.freeze_perturbation = true;
  plan.validate();
  return plan;
}

std::vector<ReportFormat> resolve_formats(const std::vector<std::string>& names) {
  if (names.empty()) return {ReportFormat::kMarkdown, ReportFormat::kCsv, ReportFormat::kJsonl};
  std::vector<ReportFormat> formats;
  for (const auto& n : names) formats.push_back(report_format_from_string(n));
  return formats;
}

void print_summary(const Report& report) {
  for (const auto& row : report.rows) {
    std::cerr << fmt::format("{:<24} n={:<3} tau={:.4f} rbo={:.4f} overlap={:.4f}\n",
                             group_label(row.group), row.kendall.n, row.kendall.mean,
                             row.rbo.mean, row.overlap.mean);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metamorphic testing harness for LLM-based recommenders"};
  app.require_subcommand(1);

  RunFlags sweep_k_flags, sweep_l_flags, mr_flags;
  auto* sweep_k = app.add_subcommand("sweep-k", "Top-k length sweep (two iterations per user)");
  auto* sweep_l = app.add_subcommand("sweep-l", "Prompt history length sweep");
  auto* run_mrs = app.add_subcommand("run-mrs", "Evaluate MR1-MR4 against the unchanged prompt");
  add_run_flags(sweep_k, sweep_k_flags);
  add_run_flags(sweep_l, sweep_l_flags);
  add_run_flags(run_mrs, mr_flags);

  std::string runs_path, report_out = "out";
  std::vector<std::string> report_formats;
  auto* report = app.add_subcommand("report", "Re-render reports from a stored runs.jsonl");
  report->add_option("--runs", runs_path, "runs.jsonl to read")->required()->check(
      CLI::ExistingFile);
  add_output_flags(report, report_out, report_formats);

  SyntheticCorpusOptions synth;
  std::string synth_out = "data";
  auto* synth_cmd =
      app.add_subcommand("synth-corpus", "Write a MovieLens-shaped synthetic movies/ratings pair");
  synth_cmd->add_option("--out", synth_out, "Output directory")->capture_default_str();
  synth_cmd->add_option("--users", synth.users)->capture_default_str();
  synth_cmd->add_option("--movies", synth.movies)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    auto run = [](Protocol protocol, const RunFlags& flags) {
      const ExperimentPlan plan = resolve_plan(protocol, flags);
      const Report result = run_experiment(plan);
      emit_report(result, flags.out, resolve_formats(flags.formats));
      print_summary(result);
    };
    if (*sweep_k) run(Protocol::kSweepK, sweep_k_flags);
    if (*sweep_l) run(Protocol::kSweepL, sweep_l_flags);
    if (*run_mrs) run(Protocol::kMrEval, mr_flags);
    if (*report) {
      const Report loaded = load_report(runs_path);
      emit_report(loaded, report_out, resolve_formats(report_formats));
    }
    if (*synth_cmd) {
      const auto corpus = generate_synthetic_corpus(synth);
      std::filesystem::create_directories(synth_out);
      write_movies(corpus.catalog, std::filesystem::path(synth_out) / "movies.csv");
      write_ratings(corpus.ratings, std::filesystem::path(synth_out) / "ratings.csv");
      std::cerr << fmt::format("{} movies, {} ratings, {} users\n", corpus.catalog.size(),
                               corpus.ratings.size(), synth.users);
    }
  } catch (const MissingRecording& e) {
    std::cerr << "replay cache miss: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
