#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtrec/dataset.hpp"
#include "mtrec/gateway.hpp"
#include "mtrec/parser.hpp"
#include "mtrec/prompt.hpp"
#include "mtrec/relations.hpp"
#include "mtrec/similarity.hpp"
#include "mtrec/stats.hpp"

namespace mtrec {

enum class Protocol { kSweepK, kSweepL, kMrEval };

std::string_view to_string(Protocol protocol);  // sweep_k, sweep_l, mr_eval
Protocol protocol_from_string(std::string_view name);

struct RelationSettings {
  int lambda_mr1 = 2;
  int lambda_mr2 = 1;
  double space_prob = 0.3;
  double word_prob = 0.1;
  std::vector<std::string> vocabulary = kDefaultVocabulary;
  /// Reuse one perturbation per user instead of re-drawing each iteration.
  bool freeze_perturbation = false;
};

/// Either every eligible user or a seeded random sample of `count`.
struct UserSample {
  bool all_eligible = false;
  std::size_t count = 100;
};

struct ExperimentPlan {
  Protocol protocol = Protocol::kMrEval;
  std::filesystem::path movies_path = "movies.csv";
  std::filesystem::path ratings_path = "ratings.csv";
  std::vector<std::size_t> k_values;
  /// Empty for sweep_k means "every liked item".
  std::vector<std::size_t> l_values;
  std::size_t iterations = 10;
  SelectionPolicy history_policy = SelectionPolicy::kRecent;
  RelationSettings relations;
  UserSample users;
  ProviderConfig provider;
  KendallMode kendall_mode = KendallMode::kUnionTied;
  double rbo_p = 0.9;
  TTestKind t_test = TTestKind::kWelch;
  bool format_suffix = true;
  std::uint64_t master_seed = 42;

  /// Protocol defaults: sweep_k k={5,10,30,50}, 2 iterations, liked items;
  /// sweep_l k=5, l={5,10,20,30}, 10 iterations; mr_eval k=5, l=20,
  /// 10 iterations.
  static ExperimentPlan defaults(Protocol protocol);

  /// Throws InvalidArgument when the plan is inconsistent.
  void validate() const;
};

nlohmann::json to_json(const ExperimentPlan& plan);

/// Overlays the keys present in `config` onto `base`.
ExperimentPlan plan_from_json(const nlohmann::json& config, ExperimentPlan base);

/// Reads a JSON config file; the protocol key, when present, must agree with
/// `protocol`.
ExperimentPlan load_plan(const std::filesystem::path& path, Protocol protocol);

enum class RunStatus { kOk, kUnparseable, kProviderError };

std::string_view to_string(RunStatus status);
RunStatus run_status_from_string(std::string_view name);

/// One completion issued during an experiment.
struct RunRecord {
  std::string group;  // row the record belongs to: "none", "MR1", "k=5", "l=20"
  RequestTag tag;
  std::size_t k = 0;
  std::size_t l = 0;
  std::string lineage;  // "source" or "followup(MRn)"
  std::string prompt;
  std::optional<std::string> source_prompt;  // set on follow-ups
  std::string cache_key;
  std::string raw_response;
  RankedList parsed;
  /// True for the record other iterations of the same user are compared to.
  bool reference = false;
  std::optional<SimilarityTriple> similarity;
  std::optional<double> rbo_residual;
  RunStatus status = RunStatus::kOk;
  std::string error;
};

nlohmann::json to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

/// Summary of one report row.
struct GroupSummary {
  std::string group;
  SampleSummary kendall;
  SampleSummary rbo;
  SampleSummary overlap;
  /// Per-iteration user averages; the samples behind the summaries.
  std::vector<double> kendall_values;
  std::vector<double> rbo_values;
  std::vector<double> overlap_values;
  std::size_t users = 0;
  std::map<std::string, std::size_t> exclusions;
};

/// Averages comparison records over users within each iteration, then
/// summarizes across iterations, one summary per entry of `groups` (in
/// that order). Reference records are skipped; unparseable and
/// provider_error records are counted, not averaged. Throws InvalidArgument
/// when `records` is empty.
std::vector<GroupSummary> aggregate_runs(const std::vector<RunRecord>& records,
                                         const std::vector<std::string>& groups);

struct ComparisonRow {
  std::string group;
  TTestResult kendall;
  TTestResult rbo;
  TTestResult overlap;
};

struct Report {
  Protocol protocol = Protocol::kMrEval;
  nlohmann::json config;
  std::vector<GroupSummary> rows;
  std::vector<ComparisonRow> comparisons;  // mr_eval only, each MR vs "none"
  std::map<std::string, std::size_t> exclusions;
  std::vector<RunRecord> records;
};

/// Row order of a protocol's report given the resolved plan.
std::vector<std::string> report_groups(const ExperimentPlan& plan);

/// Display label of a row ("MR1: Multiply", "k=5", ...).
std::string group_label(std::string_view group);

/// Aggregates `records` into a report; `exclusions` carries corpus-level
/// counts (ineligible users, dropped events, unparseable baselines).
Report build_report(const ExperimentPlan& plan, std::vector<RunRecord> records,
                    std::map<std::string, std::size_t> exclusions);

/// Catalog plus per-user histories.
struct Corpus {
  std::shared_ptr<const MovieCatalog> catalog;
  HistoryIndex index;

  static Corpus load(const std::filesystem::path& movies,
                     const std::filesystem::path& ratings);
  static Corpus from(MovieCatalog catalog, const std::vector<RatingEvent>& events);
};

class ExperimentRunner {
 public:
  ExperimentRunner(ExperimentPlan plan, Corpus corpus, std::shared_ptr<Provider> provider);

  Report run();
  Report run_sweep_k();
  Report run_sweep_l();
  Report run_mr_eval();

  const ExperimentPlan& plan() const noexcept { return plan_; }

 private:
  struct UserOutcome;

  std::vector<UserId> sample_users(const std::vector<UserId>& eligible,
                                   std::uint64_t stream) const;
  template <typename Fn>
  std::vector<UserOutcome> for_each_user(const std::vector<UserId>& users, Fn fn);
  RunRecord issue(const std::string& group, const RequestTag& tag, const Prompt& prompt,
                  std::size_t l);
  MetricConfig metrics(std::size_t k) const;

  ExperimentPlan plan_;
  Corpus corpus_;
  std::shared_ptr<Provider> provider_;
};

/// Loads the corpus, builds the provider and runs `plan`.
Report run_experiment(const ExperimentPlan& plan);

enum class ReportFormat { kCsv, kMarkdown, kJsonl };

ReportFormat report_format_from_string(std::string_view name);

std::string render_markdown(const Report& report);
std::string render_csv(const Report& report);
std::string render_jsonl(const Report& report);

/// Writes report.md / report.csv / runs.jsonl for the requested formats into
/// `out_dir` (created when missing). Throws IoError when not writable.
void emit_report(const Report& report, const std::filesystem::path& out_dir,
                 const std::vector<ReportFormat>& formats);

/// Re-reads runs.jsonl and rebuilds the report from its records.
Report load_report(const std::filesystem::path& runs_jsonl);

}  // namespace mtrec
