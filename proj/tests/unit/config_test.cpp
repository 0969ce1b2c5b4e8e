#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "mtrec/error.hpp"
#include "mtrec/experiment.hpp"

using namespace mtrec;

TEST(PlanDefaults, MatchTheStudyProtocols) {
  const auto k = ExperimentPlan::defaults(Protocol::kSweepK);
  EXPECT_EQ(k.k_values, (std::vector<std::size_t>{5, 10, 30, 50}));
  EXPECT_EQ(k.iterations, 2u);
  EXPECT_EQ(k.history_policy, SelectionPolicy::kLiked);
  EXPECT_TRUE(k.l_values.empty());

  const auto l = ExperimentPlan::defaults(Protocol::kSweepL);
  EXPECT_EQ(l.k_values, (std::vector<std::size_t>{5}));
  EXPECT_EQ(l.l_values, (std::vector<std::size_t>{5, 10, 20, 30}));
  EXPECT_EQ(l.iterations, 10u);

  const auto mr = ExperimentPlan::defaults(Protocol::kMrEval);
  EXPECT_EQ(mr.k_values, (std::vector<std::size_t>{5}));
  EXPECT_EQ(mr.l_values, (std::vector<std::size_t>{20}));
  EXPECT_EQ(mr.iterations, 10u);
  EXPECT_EQ(mr.relations.lambda_mr1, 2);
  EXPECT_EQ(mr.relations.lambda_mr2, 1);
  EXPECT_DOUBLE_EQ(mr.relations.space_prob, 0.3);
  EXPECT_DOUBLE_EQ(mr.relations.word_prob, 0.1);
  EXPECT_DOUBLE_EQ(mr.provider.temperature, 1.0);
  EXPECT_EQ(mr.users.count, 100u);
  EXPECT_EQ(mr.t_test, TTestKind::kWelch);
  EXPECT_EQ(mr.kendall_mode, KendallMode::kUnionTied);
  EXPECT_DOUBLE_EQ(mr.rbo_p, 0.9);
  EXPECT_TRUE(mr.format_suffix);
  for (auto p : {Protocol::kSweepK, Protocol::kSweepL, Protocol::kMrEval}) {
    EXPECT_NO_THROW(ExperimentPlan::defaults(p).validate());
  }
}

TEST(PlanValidate, RejectsInconsistentPlans) {
  auto plan = ExperimentPlan::defaults(Protocol::kMrEval);
  plan.k_values = {5, 10};
  EXPECT_THROW(plan.validate(), InvalidArgument);
  plan = ExperimentPlan::defaults(Protocol::kMrEval);
  plan.iterations = 0;
  EXPECT_THROW(plan.validate(), InvalidArgument);
  plan = ExperimentPlan::defaults(Protocol::kMrEval);
  plan.iterations = 1;
  EXPECT_NO_THROW(plan.validate());
  plan = ExperimentPlan::defaults(Protocol::kSweepL);
  plan.iterations = 1;
  EXPECT_THROW(plan.validate(), InvalidArgument);
  plan = ExperimentPlan::defaults(Protocol::kSweepK);
  plan.history_policy = SelectionPolicy::kRecent;
  EXPECT_THROW(plan.validate(), InvalidArgument);
  plan = ExperimentPlan::defaults(Protocol::kMrEval);
  plan.relations.lambda_mr2 = 0;
  EXPECT_THROW(plan.validate(), InvalidArgument);
  plan = ExperimentPlan::defaults(Protocol::kMrEval);
  plan.relations.space_prob = 1.2;
  EXPECT_THROW(plan.validate(), InvalidArgument);
  plan = ExperimentPlan::defaults(Protocol::kMrEval);
  plan.rbo_p = 1.0;
  EXPECT_THROW(plan.validate(), InvalidArgument);
  plan = ExperimentPlan::defaults(Protocol::kMrEval);
  plan.provider.kind = ProviderKind::kReplay;
  EXPECT_THROW(plan.validate(), InvalidArgument);
  plan = ExperimentPlan::defaults(Protocol::kSweepL);
  plan.k_values = {5, 10};
  EXPECT_THROW(plan.validate(), InvalidArgument);
  plan = ExperimentPlan::defaults(Protocol::kSweepL);
  plan.l_values = {0};
  EXPECT_THROW(plan.validate(), InvalidArgument);
}

TEST(PlanJson, RoundTrips) {
  auto plan = ExperimentPlan::defaults(Protocol::kSweepL);
  plan.users.all_eligible = true;
  plan.provider.cache_path = "cache.jsonl";
  plan.provider.kind = ProviderKind::kReplay;
  plan.relations.freeze_perturbation = true;
  plan.relations.vocabulary = {"kiwi"};
  plan.kendall_mode = KendallMode::kIntersection;
  plan.t_test = TTestKind::kPooled;
  plan.master_seed = 123456789012345ULL;
  plan.provider.remote.base_url = "https://api.example.com";
  const auto j = to_json(plan);
  const auto back = plan_from_json(j, ExperimentPlan::defaults(Protocol::kMrEval));
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.protocol, Protocol::kSweepL);
  EXPECT_EQ(j.at("users"), "all");
  EXPECT_EQ(j.at("provider").at("cache"), "cache.jsonl");
}

TEST(PlanJson, NeverEchoesTheApiKey) {
  auto plan = ExperimentPlan::defaults(Protocol::kMrEval);
  plan.provider.remote.api_key = "sk-secret";
  EXPECT_EQ(to_json(plan).dump().find("sk-secret"), std::string::npos);
}

TEST(PlanJson, PartialOverlay) {
  const auto plan = plan_from_json(nlohmann::json::parse(R"({"iterations": 3, "relations": {"lambda_mr1": 4}, "users": 12})"),
                                   ExperimentPlan::defaults(Protocol::kMrEval));
  EXPECT_EQ(plan.iterations, 3u);
  EXPECT_EQ(plan.relations.lambda_mr1, 4);
  EXPECT_EQ(plan.relations.lambda_mr2, 1);
  EXPECT_EQ(plan.users.count, 12u);
  EXPECT_FALSE(plan.users.all_eligible);
  EXPECT_THROW(plan_from_json(nlohmann::json::parse(R"({"users": "some"})"), plan), InvalidArgument);
  EXPECT_THROW(plan_from_json(nlohmann::json::parse(R"({"iterations": "x"})"), plan), InvalidArgument);
}

TEST(LoadPlan, ProtocolMustAgree) {
  const auto path = std::filesystem::temp_directory_path() / "mtrec_plan.json";
  std::ofstream(path) << R"({"protocol": "sweep_k", "iterations": 2})";
  EXPECT_EQ(load_plan(path, Protocol::kSweepK).protocol, Protocol::kSweepK);
  EXPECT_THROW(load_plan(path, Protocol::kMrEval), InvalidArgument);
  std::ofstream(path) << "{not json";
  EXPECT_THROW(load_plan(path, Protocol::kSweepK), ParseError);
  EXPECT_THROW(load_plan("/nonexistent.json", Protocol::kSweepK), IoError);
}

TEST(ProtocolNames, RoundTrip) {
  for (auto p : {Protocol::kSweepK, Protocol::kSweepL, Protocol::kMrEval}) {
    EXPECT_EQ(protocol_from_string(to_string(p)), p);
  }
  EXPECT_EQ(to_string(Protocol::kMrEval), "mr_eval");
  EXPECT_THROW(protocol_from_string("mr-eval"), InvalidArgument);
}
