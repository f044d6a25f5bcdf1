#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "fusionrec/errors.hpp"
#include "fusionrec/evaluation.hpp"
#include "fusionrec/features.hpp"
#include "fixture.hpp"

using namespace fusionrec;
using fusionrec::testing::Artifacts;

TEST_CASE("eval users keep only liked ratings in both domains") {
  std::vector<Rating> ratings{
      {"u1", "m1", Domain::Source, 5}, {"u1", "b1", Domain::Target, 4},
      {"u2", "m1", Domain::Source, 5}, {"u2", "b1", Domain::Target, 3},
      {"u3", "b1", Domain::Target, 5}, {"u3", "b2", Domain::Target, 5},
      {"u1", "b2", Domain::Target, 2}, {"u1", "m1", Domain::Source, 4},
  };
  auto users = build_eval_users(ratings);
  REQUIRE(users.size() == 1);
  CHECK(users[0].user_id == "u1");
  CHECK(users[0].liked_sources == std::vector<std::string>{"m1"});
  CHECK(users[0].liked_targets == std::map<std::string, double>{{"b1", 4.0}});
  CHECK_THROWS_AS(build_eval_users({{"u2", "m1", Domain::Source, 5}}), NoEvalUsers);
}

TEST_CASE("mae and rmse examples") {
  auto [mae, rmse] = mae_rmse(std::vector<double>{4, 5}, std::vector<double>{5, 5});
  CHECK(mae == 0.5);
  CHECK(rmse == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  auto [m0, r0] = mae_rmse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3});
  CHECK(m0 == 0.0);
  CHECK(r0 == 0.0);
  auto [m1, r1] = mae_rmse(std::vector<double>{3}, std::vector<double>{5});
  CHECK(m1 == 2.0);
  CHECK(r1 == 2.0);
  CHECK_THROWS_AS(mae_rmse(std::vector<double>{1}, std::vector<double>{1, 2}), LengthMismatch);
  CHECK_THROWS_AS(mae_rmse(std::vector<double>{}, std::vector<double>{}), EmptyInput);
}

TEST_CASE("score to rating mapping") {
  auto r = scores_to_ratings(std::vector<double>{0.2, 0.8, 0.5});
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 5.0);
  CHECK(r[2] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(scores_to_ratings(std::vector<double>{0.4, 0.4}) == std::vector<double>{3.0, 3.0});
}

TEST_CASE("threshold counts round up") {
  CHECK(threshold_count(20, 10) == 2);
  CHECK(threshold_count(50, 10) == 5);
  CHECK(threshold_count(80, 10) == 8);
  for (int p : {20, 50, 80}) CHECK(threshold_count(p, 1) == 1);
  CHECK(threshold_count(20, 3) == 1);
  CHECK(threshold_count(50, 3) == 2);
}

namespace {

struct EvalFixture {
  Artifacts a{90};
  Recommender rec{a.data.source.items, a.index, a.encoder, a.genre_model, a.checkpoint, a.tfidf};
  Evaluator evaluator{rec, compute_features(a.data.target.items, a.encoder, a.genre_model).text};
  std::vector<EvalUser> users = build_eval_users(a.data.ratings);
};

}  // namespace

TEST_CASE("evaluation invariants on the synthetic dataset") {
  EvalFixture f;
  REQUIRE_FALSE(f.users.empty());
  for (auto mode : kAllModes) {
    std::vector<UserEvaluation> details;
    auto report = f.evaluator.evaluate(f.users, mode, {}, kDefaultThresholds, &details);
    CHECK(report.mode == mode);
    CHECK(report.user_count == details.size());
    std::size_t pairs = 0;
    for (int p : kDefaultThresholds) {
      CHECK(report.mae.at(p) <= report.rmse.at(p) + 1e-12);
      CHECK(report.mae.at(p) >= 0.0);
    }
    for (const auto& d : details) {
      pairs += d.ranked_targets.size();
      CHECK(d.selected.at(20) <= d.selected.at(50));
      CHECK(d.selected.at(50) <= d.selected.at(80));
      CHECK(d.selected.at(80) <= d.ranked_targets.size());
      for (std::size_t i = 1; i < d.predicted.size(); ++i) CHECK(d.predicted[i - 1] >= d.predicted[i]);
      for (double x : d.predicted) {
        CHECK(x >= 1.0);
        CHECK(x <= 5.0);
      }
    }
    CHECK(report.pair_count == pairs);
    std::size_t at50 = 0;
    for (const auto& d : details) at50 += d.selected.at(50);
    CHECK(report.pairs_at.at(50) == at50);
  }
}

TEST_CASE("predicted ratings span 1 to 5 over the index") {
  EvalFixture f;
  auto preds = f.evaluator.predict_ratings(f.users.front(), EvalMode::Fused, {});
  CHECK(preds.size() == f.a.index.size());
  double lo = 5, hi = 1;
  for (const auto& [id, r] : preds) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(lo == 1.0);
  CHECK(hi == 5.0);
}

TEST_CASE("a single liked target is evaluated at every threshold") {
  EvalFixture f;
  EvalUser u = f.users.front();
  u.liked_targets = {*u.liked_targets.begin()};
  std::vector<EvalUser> one{u};
  auto report = f.evaluator.evaluate(one, EvalMode::GenreOnly, {});
  for (int p : kDefaultThresholds) CHECK(report.pairs_at.at(p) == 1);
}

TEST_CASE("evaluation is repeatable and the report JSON has a fixed shape") {
  EvalFixture f;
  auto a = f.evaluator.evaluate(f.users, EvalMode::Fused, {});
  auto b = f.evaluator.evaluate(f.users, EvalMode::Fused, {});
  const auto ja = eval_report_json(a, R"({"seed":7})");
  CHECK(ja == eval_report_json(b, R"({"seed":7})"));
  auto j = nlohmann::ordered_json::parse(ja);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"mode", "thresholds", "mae", "rmse", "pairs_at",
                                         "user_count", "pair_count", "config_echo"});
  CHECK(j["mode"] == "fused");
  CHECK(j["config_echo"]["seed"] == 7);
  CHECK(j["mae"].contains("50"));
}

TEST_CASE("eval mode names") {
  for (auto m : kAllModes) CHECK(parse_eval_mode(to_string(m)) == m);
  CHECK_FALSE(parse_eval_mode("hybrid").has_value());
}
