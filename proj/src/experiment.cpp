#include "mtrec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "mtrec/error.hpp"
#include "mtrec/random.hpp"

namespace mtrec {
namespace {

using json = nlohmann::json;

constexpr std::uint64_t kUserSampleStream = 0x7573657273ULL;  // "users"

const std::vector<std::string> kMrEvalGroups = {"none", "MR1", "MR2", "MR3", "MR4"};

void merge_counts(std::map<std::string, std::size_t>& into,
                  const std::map<std::string, std::size_t>& from) {
  for (const auto& [cause, count] : from) into[cause] += count;
}

std::string baseline_cause(RunStatus status) {
  return status == RunStatus::kProviderError ? "provider_error_baseline"
                                             : "unparseable_baseline";
}

json similarity_json(const SimilarityTriple& s) {
  return json{{"kendall", s.kendall}, {"rbo", s.rbo}, {"overlap", s.overlap}};
}

}  // namespace

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kOk: return "ok";
    case RunStatus::kUnparseable: return "unparseable";
    case RunStatus::kProviderError: return "provider_error";
  }
  return "?";
}

RunStatus run_status_from_string(std::string_view name) {
  if (name == "ok") return RunStatus::kOk;
  if (name == "unparseable") return RunStatus::kUnparseable;
  if (name == "provider_error") return RunStatus::kProviderError;
  throw InvalidArgument("unknown run status '" + std::string(name) + "'");
}

nlohmann::json to_json(const RunRecord& r) {
  json items = json::array();
  for (const auto& item : r.parsed.items) {
    items.push_back(json{{"display", item.display}, {"key", item.key}});
  }
  return json{
      {"group", r.group},
      {"user_id", r.tag.user_id},
      {"method", r.tag.method},
      {"iteration", r.tag.iteration},
      {"k", r.k},
      {"l", r.l},
      {"lineage", r.lineage},
      {"prompt", r.prompt},
      {"source_prompt", r.source_prompt ? json(*r.source_prompt) : json(nullptr)},
      {"cache_key", r.cache_key},
      {"raw_response", r.raw_response},
      {"parsed",
       {{"items", items},
        {"k_requested", r.parsed.k_requested},
        {"truncated", r.parsed.truncated},
        {"raw_line_count", r.parsed.raw_line_count}}},
      {"reference", r.reference},
      {"similarity", r.similarity ? similarity_json(*r.similarity) : json(nullptr)},
      {"rbo_residual", r.rbo_residual ? json(*r.rbo_residual) : json(nullptr)},
      {"status", to_string(r.status)},
      {"error", r.error}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.group = j.at("group").get<std::string>();
  r.tag.user_id = j.at("user_id").get<UserId>();
  r.tag.method = j.at("method").get<std::string>();
  r.tag.iteration = j.at("iteration").get<std::int64_t>();
  r.k = j.at("k").get<std::size_t>();
  r.l = j.at("l").get<std::size_t>();
  r.lineage = j.at("lineage").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  if (!j.at("source_prompt").is_null()) r.source_prompt = j.at("source_prompt").get<std::string>();
  r.cache_key = j.at("cache_key").get<std::string>();
  r.raw_response = j.at("raw_response").get<std::string>();
  const auto& parsed = j.at("parsed");
  for (const auto& item : parsed.at("items")) {
    r.parsed.items.push_back(
        TitleKey{item.at("display").get<std::string>(), item.at("key").get<std::string>()});
  }
  r.parsed.k_requested = parsed.at("k_requested").get<std::size_t>();
  r.parsed.truncated = parsed.at("truncated").get<bool>();
  r.parsed.raw_line_count = parsed.at("raw_line_count").get<std::size_t>();
  r.reference = j.at("reference").get<bool>();
  if (!j.at("similarity").is_null()) {
    const auto& s = j.at("similarity");
    r.similarity = SimilarityTriple{s.at("kendall").get<double>(), s.at("rbo").get<double>(),
                                    s.at("overlap").get<double>()};
  }
  if (!j.at("rbo_residual").is_null()) r.rbo_residual = j.at("rbo_residual").get<double>();
  r.status = run_status_from_string(j.at("status").get<std::string>());
  r.error = j.at("error").get<std::string>();
  return r;
}

std::vector<GroupSummary> aggregate_runs(const std::vector<RunRecord>& records,
                                         const std::vector<std::string>& groups) {
  if (records.empty()) throw InvalidArgument("no run records to aggregate");
  struct Sums {
    double kendall = 0, rbo = 0, overlap = 0;
    std::size_t n = 0;
  };
  std::vector<GroupSummary> out;
  out.reserve(groups.size());
  for (const auto& group : groups) {
    GroupSummary summary;
    summary.group = group;
    std::map<std::int64_t, Sums> by_iteration;
    std::set<UserId> users;
    for (const auto& r : records) {
      if (r.group != group || r.reference) continue;
      if (r.status != RunStatus::kOk || !r.similarity) {
        ++summary.exclusions[std::string(to_string(r.status))];
        continue;
      }
      auto& sums = by_iteration[r.tag.iteration];
      sums.kendall += r.similarity->kendall;
      sums.rbo += r.similarity->rbo;
      sums.overlap += r.similarity->overlap;
      ++sums.n;
      users.insert(r.tag.user_id);
    }
    for (const auto& [iteration, sums] : by_iteration) {
      const auto n = static_cast<double>(sums.n);
      summary.kendall_values.push_back(sums.kendall / n);
      summary.rbo_values.push_back(sums.rbo / n);
      summary.overlap_values.push_back(sums.overlap / n);
    }
    if (!summary.kendall_values.empty()) {
      summary.kendall = mean_sd(summary.kendall_values);
      summary.rbo = mean_sd(summary.rbo_values);
      summary.overlap = mean_sd(summary.overlap_values);
    }
    summary.users = users.size();
    out.push_back(std::move(summary));
  }
  return out;
}

std::vector<std::string> report_groups(const ExperimentPlan& plan) {
  std::vector<std::string> groups;
  switch (plan.protocol) {
    case Protocol::kSweepK:
      for (auto k : plan.k_values) groups.push_back("k=" + std::to_string(k));
      break;
    case Protocol::kSweepL:
      for (auto l : plan.l_values) groups.push_back("l=" + std::to_string(l));
      break;
    case Protocol::kMrEval:
      groups = kMrEvalGroups;
      break;
  }
  return groups;
}

std::string group_label(std::string_view group) {
  if (group == "none") return "No change (baseline)";
  if (group == "MR1") return "MR1: Multiply";
  if (group == "MR2") return "MR2: Addition";
  if (group == "MR3") return "MR3: Spaces";
  if (group == "MR4") return "MR4: Random words";
  return std::string(group);
}

Report build_report(const ExperimentPlan& plan, std::vector<RunRecord> records,
                    std::map<std::string, std::size_t> exclusions) {
  Report report;
  report.protocol = plan.protocol;
  report.config = to_json(plan);
  report.exclusions = std::move(exclusions);
  if (!records.empty()) report.rows = aggregate_runs(records, report_groups(plan));
  for (const auto& row : report.rows) {
    for (const auto& [cause, count] : row.exclusions) {
      report.exclusions[cause + "[" + row.group + "]"] += count;
    }
  }
  if (plan.protocol == Protocol::kMrEval && !report.rows.empty()) {
    const GroupSummary& reference = report.rows.front();
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
      const auto& row = report.rows[i];
      if (reference.kendall_values.size() < 2 || row.kendall_values.size() < 2) {
        ++report.exclusions["t_test_skipped[" + row.group + "]"];
        continue;
      }
      ComparisonRow cmp;
      cmp.group = row.group;
      cmp.kendall = t_test(plan.t_test, reference.kendall_values, row.kendall_values);
      cmp.rbo = t_test(plan.t_test, reference.rbo_values, row.rbo_values);
      cmp.overlap = t_test(plan.t_test, reference.overlap_values, row.overlap_values);
      report.comparisons.push_back(cmp);
    }
  }
  report.records = std::move(records);
  return report;
}

Corpus Corpus::load(const std::filesystem::path& movies, const std::filesystem::path& ratings) {
  return from(load_movies(movies), load_ratings(ratings));
}

Corpus Corpus::from(MovieCatalog catalog, const std::vector<RatingEvent>& events) {
  Corpus corpus;
  corpus.index = build_histories(events, catalog);
  corpus.catalog = std::make_shared<const MovieCatalog>(std::move(catalog));
  return corpus;
}

struct ExperimentRunner::UserOutcome {
  std::vector<RunRecord> records;
  std::map<std::string, std::size_t> exclusions;
};

ExperimentRunner::ExperimentRunner(ExperimentPlan plan, Corpus corpus,
                                   std::shared_ptr<Provider> provider)
    : plan_(std::move(plan)), corpus_(std::move(corpus)), provider_(std::move(provider)) {
  plan_.validate();
  if (!provider_) throw InvalidArgument("experiment needs a provider");
  if (!corpus_.catalog) throw InvalidArgument("experiment needs a catalog");
}

MetricConfig ExperimentRunner::metrics(std::size_t k) const {
  return MetricConfig{plan_.kendall_mode, plan_.rbo_p, k};
}

std::vector<UserId> ExperimentRunner::sample_users(const std::vector<UserId>& eligible,
                                                   std::uint64_t stream) const {
  if (plan_.users.all_eligible || plan_.users.count >= eligible.size()) return eligible;
  std::vector<UserId> pool = eligible;
  Rng rng(derive_seed(plan_.master_seed, 0, kUserSampleStream, stream));
  for (std::size_t i = 0; i < plan_.users.count; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(plan_.users.count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

template <typename Fn>
std::vector<ExperimentRunner::UserOutcome> ExperimentRunner::for_each_user(
    const std::vector<UserId>& users, Fn fn) {
  std::vector<UserOutcome> outcomes(users.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= users.size()) return;
      try {
        outcomes[i] = fn(users[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };

  const std::size_t threads = std::min<std::size_t>(
      static_cast<std::size_t>(plan_.provider.max_in_flight), users.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

RunRecord ExperimentRunner::issue(const std::string& group, const RequestTag& tag,
                                  const Prompt& prompt, std::size_t l) {
  RunRecord record;
  record.group = group;
  record.tag = tag;
  record.k = prompt.k;
  record.l = l;
  record.lineage = prompt.lineage();
  record.prompt = prompt.text;

  CompletionRequest request;
  request.model = plan_.provider.model;
  request.prompt_text = prompt.text;
  request.temperature = plan_.provider.temperature;
  request.max_tokens = plan_.provider.max_tokens;
  request.tag = tag;
  record.cache_key = cache_key(request);
  try {
    const auto response = provider_->complete(request);
    record.raw_response = response.raw_text;
    record.parsed = parse_recommendations(response.raw_text, prompt.k);
    record.status = record.parsed.empty() ? RunStatus::kUnparseable : RunStatus::kOk;
  } catch (const MissingRecording&) {
    throw;
  } catch (const ProviderError& e) {
    record.status = RunStatus::kProviderError;
    record.error = e.what();
  }
  return record;
}

namespace {

void compare_to(RunRecord& record, const RankedList& reference, const MetricConfig& metrics) {
  if (record.status != RunStatus::kOk) return;
  record.similarity = similarity_triple(reference, record.parsed, metrics);
  record.rbo_residual = rbo_residual(reference.keys(), record.parsed.keys(), metrics.rbo_p);
}

}  // namespace

Report ExperimentRunner::run() {
  switch (plan_.protocol) {
    case Protocol::kSweepK: return run_sweep_k();
    case Protocol::kSweepL: return run_sweep_l();
    case Protocol::kMrEval: return run_mr_eval();
  }
  throw InvalidArgument("unknown protocol");
}

Report ExperimentRunner::run_sweep_k() {
  std::vector<RunRecord> records;
  std::map<std::string, std::size_t> exclusions;
  exclusions["dropped_events"] = corpus_.index.dropped_events;

  const bool all_liked = plan_.l_values.empty();
  const std::size_t l = all_liked ? 0 : plan_.l_values.front();
  auto select = [&](UserId user) {
    const auto& events = corpus_.index.by_user.at(user);
    return all_liked ? select_all(user, events, *corpus_.catalog, SelectionPolicy::kLiked)
                     : select_history(user, events, *corpus_.catalog, l,
                                      SelectionPolicy::kLiked);
  };

  std::vector<UserId> eligible;
  for (const auto& [user, events] : corpus_.index.by_user) {
    if (select(user).eligible) eligible.push_back(user);
  }
  if (eligible.empty()) throw InvalidArgument("no eligible users for sweep_k");
  exclusions["ineligible_users"] = corpus_.index.by_user.size() - eligible.size();
  const auto users = sample_users(eligible, 0);
  const PromptOptions options{plan_.format_suffix, std::nullopt};

  for (const auto k : plan_.k_values) {
    const std::string group = "k=" + std::to_string(k);
    auto outcomes = for_each_user(users, [&](UserId user) {
      UserOutcome out;
      const auto selection = select(user);
      const Prompt prompt = render_prompt(selection.history, kOriginalScale, k, options);
      const std::size_t used_l = selection.history.items.size();
      RunRecord first = issue(group, RequestTag{user, group, 1}, prompt, used_l);
      first.reference = true;
      const bool usable = first.status == RunStatus::kOk;
      const RankedList reference = first.parsed;
      out.records.push_back(std::move(first));
      if (!usable) {
        ++out.exclusions[baseline_cause(out.records.back().status) + "[" + group + "]"];
        return out;
      }
      for (std::size_t it = 2; it <= plan_.iterations; ++it) {
        RunRecord r = issue(group, RequestTag{user, group, static_cast<std::int64_t>(it)},
                            prompt, used_l);
        compare_to(r, reference, metrics(k));
        out.records.push_back(std::move(r));
      }
      return out;
    });
    for (auto& o : outcomes) {
      std::move(o.records.begin(), o.records.end(), std::back_inserter(records));
      merge_counts(exclusions, o.exclusions);
    }
  }
  return build_report(plan_, std::move(records), std::move(exclusions));
}

Report ExperimentRunner::run_sweep_l() {
  std::vector<RunRecord> records;
  std::map<std::string, std::size_t> exclusions;
  exclusions["dropped_events"] = corpus_.index.dropped_events;
  const std::size_t k = plan_.k_values.front();
  const PromptOptions options{plan_.format_suffix, std::nullopt};

  for (const auto l : plan_.l_values) {
    const std::string group = "l=" + std::to_string(l);
    std::vector<UserId> eligible;
    for (const auto& [user, events] : corpus_.index.by_user) {
      if (select_history(user, events, *corpus_.catalog, l, plan_.history_policy).eligible) {
        eligible.push_back(user);
      }
    }
    exclusions["ineligible_users[" + group + "]"] =
        corpus_.index.by_user.size() - eligible.size();
    const auto users = sample_users(eligible, l);

    auto outcomes = for_each_user(users, [&](UserId user) {
      UserOutcome out;
      const auto selection = select_history(user, corpus_.index.by_user.at(user),
                                            *corpus_.catalog, l, plan_.history_policy);
      const Prompt prompt = render_prompt(selection.history, kOriginalScale, k, options);
      RunRecord first = issue(group, RequestTag{user, group, 1}, prompt, l);
      first.reference = true;
      const bool usable = first.status == RunStatus::kOk;
      const RankedList reference = first.parsed;
      out.records.push_back(std::move(first));
      if (!usable) {
        ++out.exclusions[baseline_cause(out.records.back().status) + "[" + group + "]"];
        return out;
      }
      for (std::size_t it = 2; it <= plan_.iterations; ++it) {
        RunRecord r = issue(group, RequestTag{user, group, static_cast<std::int64_t>(it)},
                            prompt, l);
        compare_to(r, reference, metrics(k));
        out.records.push_back(std::move(r));
      }
      return out;
    });
    for (auto& o : outcomes) {
      std::move(o.records.begin(), o.records.end(), std::back_inserter(records));
      merge_counts(exclusions, o.exclusions);
    }
  }
  return build_report(plan_, std::move(records), std::move(exclusions));
}

Report ExperimentRunner::run_mr_eval() {
  std::map<std::string, std::size_t> exclusions;
  exclusions["dropped_events"] = corpus_.index.dropped_events;
  const std::size_t k = plan_.k_values.front();
  const std::size_t l = plan_.l_values.front();
  const PromptOptions options{plan_.format_suffix, std::nullopt};
  const auto& rel = plan_.relations;

  std::vector<UserId> eligible;
  for (const auto& [user, events] : corpus_.index.by_user) {
    if (select_history(user, events, *corpus_.catalog, l, plan_.history_policy).eligible) {
      eligible.push_back(user);
    }
  }
  if (eligible.empty()) throw InvalidArgument("no users with enough rated items");
  exclusions["ineligible_users"] = corpus_.index.by_user.size() - eligible.size();
  const auto users = sample_users(eligible, 0);

  auto relation_for = [&](MrKind kind, UserId user, std::size_t iteration) {
    const std::uint64_t seed =
        derive_seed(plan_.master_seed, static_cast<std::uint64_t>(user),
                    fnv1a64(to_string(kind)), rel.freeze_perturbation ? 0 : iteration);
    switch (kind) {
      case MrKind::kMr1: return MetamorphicRelation::multiply(rel.lambda_mr1);
      case MrKind::kMr2: return MetamorphicRelation::shift(rel.lambda_mr2);
      case MrKind::kMr3: return MetamorphicRelation::spaces(rel.space_prob, seed);
      case MrKind::kMr4: return MetamorphicRelation::words(rel.word_prob, seed, rel.vocabulary);
    }
    throw InvalidArgument("unknown relation");
  };

  auto outcomes = for_each_user(users, [&](UserId user) {
    UserOutcome out;
    const auto selection = select_history(user, corpus_.index.by_user.at(user),
                                          *corpus_.catalog, l, plan_.history_policy);
    const Prompt source = render_prompt(selection.history, kOriginalScale, k, options);
    RunRecord baseline = issue("baseline", RequestTag{user, "baseline", 0}, source, l);
    baseline.reference = true;
    const bool usable = baseline.status == RunStatus::kOk;
    const RankedList reference = baseline.parsed;
    out.records.push_back(std::move(baseline));
    if (!usable) {
      ++out.exclusions[baseline_cause(out.records.back().status)];
      return out;
    }
    for (std::size_t it = 1; it <= plan_.iterations; ++it) {
      const auto iteration = static_cast<std::int64_t>(it);
      RunRecord unchanged = issue("none", RequestTag{user, "none", iteration}, source, l);
      compare_to(unchanged, reference, metrics(k));
      out.records.push_back(std::move(unchanged));
      for (const MrKind kind : {MrKind::kMr1, MrKind::kMr2, MrKind::kMr3, MrKind::kMr4}) {
        const std::string method(to_string(kind));
        const auto relation = relation_for(kind, user, it);
        const Prompt followup = derive_followup(selection.history, source, relation, options);
        RunRecord r = issue(method, RequestTag{user, method, iteration}, followup, l);
        r.source_prompt = source.text;
        compare_to(r, reference, metrics(k));
        out.records.push_back(std::move(r));
      }
    }
    return out;
  });

  std::vector<RunRecord> records;
  for (auto& o : outcomes) {
    std::move(o.records.begin(), o.records.end(), std::back_inserter(records));
    merge_counts(exclusions, o.exclusions);
  }
  return build_report(plan_, std::move(records), std::move(exclusions));
}

Report run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  Corpus corpus = Corpus::load(plan.movies_path, plan.ratings_path);
  auto provider = make_provider(plan.provider, corpus.catalog, plan.master_seed);
  ExperimentRunner runner(plan, std::move(corpus), std::move(provider));
  return runner.run();
}

}  // namespace mtrec
