#include <fstream>

#include <nlohmann/json.hpp>

#include "mtrec/error.hpp"
#include "mtrec/experiment.hpp"

namespace mtrec {
namespace {

using json = nlohmann::json;

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

std::string_view to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::kSweepK: return "sweep_k";
    case Protocol::kSweepL: return "sweep_l";
    case Protocol::kMrEval: return "mr_eval";
  }
  return "?";
}

Protocol protocol_from_string(std::string_view name) {
  if (name == "sweep_k") return Protocol::kSweepK;
  if (name == "sweep_l") return Protocol::kSweepL;
  if (name == "mr_eval") return Protocol::kMrEval;
  throw InvalidArgument("unknown protocol '" + std::string(name) + "'");
}

ExperimentPlan ExperimentPlan::defaults(Protocol protocol) {
  ExperimentPlan plan;
  plan.protocol = protocol;
  switch (protocol) {
    case Protocol::kSweepK:
      plan.k_values = {5, 10, 30, 50};
      plan.iterations = 2;
      plan.history_policy = SelectionPolicy::kLiked;
      break;
    case Protocol::kSweepL:
      plan.k_values = {5};
      plan.l_values = {5, 10, 20, 30};
      plan.iterations = 10;
      break;
    case Protocol::kMrEval:
      plan.k_values = {5};
      plan.l_values = {20};
      plan.iterations = 10;
      break;
  }
  return plan;
}

void ExperimentPlan::validate() const {
  auto positive = [](const std::vector<std::size_t>& values, const char* name) {
    for (auto v : values) {
      if (v < 1) throw InvalidArgument(std::string(name) + " values must be positive");
    }
  };
  positive(k_values, "k");
  positive(l_values, "l");
  if (k_values.empty()) throw InvalidArgument("at least one k is required");
  if (iterations < 1) throw InvalidArgument("iterations must be at least 1");
  // Sweeps compare iterations 2.. against iteration 1.
  if (protocol != Protocol::kMrEval && iterations < 2) {
    throw InvalidArgument("sweeps need at least 2 iterations");
  }
  switch (protocol) {
    case Protocol::kSweepK:
      if (history_policy != SelectionPolicy::kLiked) {
        throw InvalidArgument("sweep_k builds histories from liked items");
      }
      if (l_values.size() > 1) throw InvalidArgument("sweep_k takes at most one l");
      break;
    case Protocol::kSweepL:
      if (k_values.size() != 1) throw InvalidArgument("sweep_l fixes a single k");
      if (l_values.empty()) throw InvalidArgument("sweep_l needs l values");
      break;
    case Protocol::kMrEval:
      if (k_values.size() != 1 || l_values.size() != 1) {
        throw InvalidArgument("mr_eval requires exactly one (k, l) pair");
      }
      break;
  }
  MetamorphicRelation::multiply(relations.lambda_mr1).validate();
  MetamorphicRelation::shift(relations.lambda_mr2).validate();
  MetamorphicRelation::spaces(relations.space_prob).validate();
  MetamorphicRelation::words(relations.word_prob, 0, relations.vocabulary).validate();
  if (!(rbo_p > 0.0 && rbo_p < 1.0)) throw InvalidArgument("rbo p must lie in (0, 1)");
  if (!users.all_eligible && users.count < 1) {
    throw InvalidArgument("user sample must be positive");
  }
  if (provider.max_in_flight < 1) throw InvalidArgument("max_in_flight must be positive");
  if (!(provider.mock_noise >= 0.0 && provider.mock_noise <= 1.0)) {
    throw InvalidArgument("mock noise must lie in [0, 1]");
  }
  if (provider.kind == ProviderKind::kReplay && !provider.cache_path) {
    throw InvalidArgument("replay provider needs a cache path");
  }
}

nlohmann::json to_json(const ExperimentPlan& plan) {
  const auto& p = plan.provider;
  json users = plan.users.all_eligible ? json("all") : json(plan.users.count);
  return json{
      {"protocol", to_string(plan.protocol)},
      {"data", {{"movies", plan.movies_path.string()}, {"ratings", plan.ratings_path.string()}}},
      {"k_values", plan.k_values},
      {"l_values", plan.l_values},
      {"iterations", plan.iterations},
      {"history_policy", to_string(plan.history_policy)},
      {"relations",
       {{"lambda_mr1", plan.relations.lambda_mr1},
        {"lambda_mr2", plan.relations.lambda_mr2},
        {"space_prob", plan.relations.space_prob},
        {"word_prob", plan.relations.word_prob},
        {"vocabulary", plan.relations.vocabulary},
        {"freeze_perturbation", plan.relations.freeze_perturbation}}},
      {"users", users},
      {"provider",
       {{"kind", to_string(p.kind)},
        {"model", p.model},
        {"temperature", p.temperature},
        {"max_tokens", p.max_tokens},
        {"mock_noise", p.mock_noise},
        {"cache", p.cache_path ? json(p.cache_path->string()) : json(nullptr)},
        {"strict_replay", p.strict_replay},
        {"max_in_flight", p.max_in_flight},
        {"remote",
         {{"base_url", p.remote.base_url},
          {"timeout_ms", p.remote.timeout.count()},
          {"max_attempts", p.remote.max_attempts},
          {"backoff_base_ms", p.remote.backoff_base.count()},
          {"backoff_cap_ms", p.remote.backoff_cap.count()},
          {"requests_per_minute", p.remote.requests_per_minute}}}}},
      {"metrics", {{"kendall_mode", to_string(plan.kendall_mode)}, {"rbo_p", plan.rbo_p}}},
      {"stats", {{"t_test", to_string(plan.t_test)}}},
      {"prompt", {{"format_suffix", plan.format_suffix}}},
      {"master_seed", plan.master_seed}};
}

ExperimentPlan plan_from_json(const nlohmann::json& j, ExperimentPlan plan) {
  try {
    if (j.contains("protocol")) {
      plan.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    }
    if (j.contains("data")) {
      const auto& d = j.at("data");
      if (d.contains("movies")) plan.movies_path = d.at("movies").get<std::string>();
      if (d.contains("ratings")) plan.ratings_path = d.at("ratings").get<std::string>();
    }
    read_if(j, "k_values", plan.k_values);
    read_if(j, "l_values", plan.l_values);
    read_if(j, "iterations", plan.iterations);
    if (j.contains("history_policy")) {
      plan.history_policy =
          selection_policy_from_string(j.at("history_policy").get<std::string>());
    }
    if (j.contains("relations")) {
      const auto& r = j.at("relations");
      read_if(r, "lambda_mr1", plan.relations.lambda_mr1);
      read_if(r, "lambda_mr2", plan.relations.lambda_mr2);
      read_if(r, "space_prob", plan.relations.space_prob);
      read_if(r, "word_prob", plan.relations.word_prob);
      read_if(r, "vocabulary", plan.relations.vocabulary);
      read_if(r, "freeze_perturbation", plan.relations.freeze_perturbation);
    }
    if (j.contains("users")) {
      const auto& u = j.at("users");
      if (u.is_string()) {
        if (u.get<std::string>() != "all") throw InvalidArgument("users must be a count or \"all\"");
        plan.users.all_eligible = true;
      } else {
        plan.users.all_eligible = false;
        plan.users.count = u.get<std::size_t>();
      }
    }
    if (j.contains("provider")) {
      const auto& p = j.at("provider");
      auto& out = plan.provider;
      if (p.contains("kind")) out.kind = provider_kind_from_string(p.at("kind").get<std::string>());
      read_if(p, "model", out.model);
      read_if(p, "temperature", out.temperature);
      read_if(p, "max_tokens", out.max_tokens);
      read_if(p, "mock_noise", out.mock_noise);
      if (p.contains("cache")) {
        if (p.at("cache").is_null()) {
          out.cache_path.reset();
        } else {
          out.cache_path = p.at("cache").get<std::string>();
        }
      }
      read_if(p, "strict_replay", out.strict_replay);
      read_if(p, "max_in_flight", out.max_in_flight);
      if (p.contains("remote")) {
        const auto& r = p.at("remote");
        read_if(r, "base_url", out.remote.base_url);
        if (r.contains("timeout_ms")) {
          out.remote.timeout = std::chrono::milliseconds(r.at("timeout_ms").get<std::int64_t>());
        }
        read_if(r, "max_attempts", out.remote.max_attempts);
        if (r.contains("backoff_base_ms")) {
          out.remote.backoff_base =
              std::chrono::milliseconds(r.at("backoff_base_ms").get<std::int64_t>());
        }
        if (r.contains("backoff_cap_ms")) {
          out.remote.backoff_cap =
              std::chrono::milliseconds(r.at("backoff_cap_ms").get<std::int64_t>());
        }
        read_if(r, "requests_per_minute", out.remote.requests_per_minute);
      }
    }
    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      if (m.contains("kendall_mode")) {
        plan.kendall_mode = kendall_mode_from_string(m.at("kendall_mode").get<std::string>());
      }
      read_if(m, "rbo_p", plan.rbo_p);
    }
    if (j.contains("stats") && j.at("stats").contains("t_test")) {
      plan.t_test = t_test_kind_from_string(j.at("stats").at("t_test").get<std::string>());
    }
    if (j.contains("prompt")) read_if(j.at("prompt"), "format_suffix", plan.format_suffix);
    read_if(j, "master_seed", plan.master_seed);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad experiment config: ") + e.what());
  }
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path, Protocol protocol) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  if (j.contains("protocol") &&
      protocol_from_string(j.at("protocol").get<std::string>()) != protocol) {
    throw InvalidArgument("config protocol does not match the subcommand");
  }
  return plan_from_json(j, ExperimentPlan::defaults(protocol));
}

}  // namespace mtrec
