#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fusionrec/errors.hpp"
#include "fusionrec/log.hpp"
#include "fusionrec/recommender.hpp"
#include "fusionrec/rng.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

using namespace fusionrec;
using fusionrec::testing::Artifacts;

namespace {

struct WarningCapture {
  std::vector<std::string> messages;
  WarningCapture() {
    set_warning_sink([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~WarningCapture() { set_warning_sink(nullptr); }
};

std::vector<std::pair<std::string, double>> brute_force(const Artifacts& a,
                                                        const std::vector<std::string>& seeds,
                                                        const ScoreWeights& w) {
  return fusionrec::testing::brute_force_ranking(a.data.source.items, a.index, a.encoder, a.genre_model,
                                                 a.checkpoint, a.tfidf, seeds, w);
}

}  // namespace

TEST_CASE("combine seed features") {
  const std::vector<std::vector<float>> one{{1, 2, 3}};
  CHECK(combine_seed_features(one) == one[0]);
  const std::vector<std::vector<float>> two{{1, 0, 0}, {0, 1, 0}};
  CHECK(combine_seed_features(two) == std::vector<float>{0.5f, 0.5f, 0});
  const std::vector<std::vector<float>> rev{{0, 1, 0}, {1, 0, 0}};
  CHECK(combine_seed_features(rev) == combine_seed_features(two));
  CHECK_THROWS_AS(combine_seed_features(std::vector<std::vector<float>>{}), EmptyInput);
  CHECK_THROWS_AS(combine_seed_features(std::vector<std::vector<float>>{{1}, {1, 2}}), ShapeMismatch);
}

TEST_CASE("rank_top_k breaks ties by id") {
  const std::vector<std::string> ids{"c", "a", "b"};
  const std::vector<ScoreBreakdown> s{{0, 0, 0, 0.5}, {0, 0, 0, 0.5}, {0, 0, 0, 0.9}};
  auto r = rank_top_k(ids, s, 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0].target_id == "b");
  CHECK(r[1].target_id == "a");
  CHECK(r[2].target_id == "c");
  CHECK(r[2].rank == 3);
  CHECK(rank_top_k(ids, s, 1).front().target_id == "b");
}

TEST_CASE("recommend matches a brute-force ranking") {
  Artifacts a(80);
  Recommender rec(a.data.source.items, a.index, a.encoder, a.genre_model, a.checkpoint, a.tfidf);
  Rng rng(21);
  for (int q = 0; q < 15; ++q) {
    std::vector<std::string> seeds;
    for (auto n = 1 + rng.below(3); n > 0; --n)
      seeds.push_back(a.data.source.items[rng.below(a.data.source.items.size())].id);
    const ScoreWeights w = q % 3 == 0 ? ScoreWeights{} : ScoreWeights{0.5, 0.3, 0.2};
    const auto expected = brute_force(a, seeds, w);
    const auto got = rec.recommend({seeds, a.index.size()}, w);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].target_id == expected[i].first);
      CHECK(got[i].breakdown.combined == expected[i].second);
      CHECK(got[i].rank == i + 1);
    }
    // top-k is a prefix of the full ranking
    const auto top5 = rec.recommend({seeds, 5}, w);
    for (std::size_t i = 0; i < 5; ++i) CHECK(top5[i] == got[i]);
  }
}

TEST_CASE("recommend is invariant to seed order") {
  Artifacts a(40);
  Recommender rec(a.data.source.items, a.index, a.encoder, a.genre_model, a.checkpoint, a.tfidf);
  const auto& s = a.data.source.items;
  auto x = rec.recommend({{s[0].id, s[5].id, s[9].id}, 10}, {});
  auto y = rec.recommend({{s[9].id, s[0].id, s[5].id}, 10}, {});
  CHECK(x == y);
}

TEST_CASE("a row equal to the seed's fused feature ranks first under fusion-only weights") {
  Artifacts a(30);
  const auto& seed = a.data.source.items[3];
  auto e = a.encoder.encode(seed);
  auto g = a.genre_model.embed_set(seed.genres);
  Eigen::VectorXf f = forward<float>(a.checkpoint.params, Eigen::Map<Eigen::VectorXf>(e.data(), 768),
                                     Eigen::Map<Eigen::VectorXf>(g.data(), 50));
  auto index = a.index;
  index.fused.row(12) = f.transpose();
  Recommender rec(a.data.source.items, index, a.encoder, a.genre_model, a.checkpoint, a.tfidf);
  auto r = rec.recommend({{seed.id}, 1}, {1, 0, 0});
  REQUIRE(r.size() == 1);
  CHECK(r[0].target_id == index.item_ids[12]);
  CHECK(r[0].breakdown.fusion_sim == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(explain(r[0]).combined == r[0].breakdown.fusion_sim);
}

TEST_CASE("scaling every weight-bearing feature leaves the ranking unchanged") {
  Artifacts a(30);
  auto scaled = a.index;
  scaled.fused *= 3.5f;
  scaled.genre *= 0.25f;
  Recommender r1(a.data.source.items, a.index, a.encoder, a.genre_model, a.checkpoint, a.tfidf);
  Recommender r2(a.data.source.items, scaled, a.encoder, a.genre_model, a.checkpoint, a.tfidf);
  const std::vector<std::string> seeds{a.data.source.items[1].id};
  auto x = r1.recommend({seeds, 30}, {});
  auto y = r2.recommend({seeds, 30}, {});
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i].breakdown.fusion_sim == doctest::Approx(y[i].breakdown.fusion_sim).epsilon(1e-6));
    CHECK(x[i].breakdown.genre_sim == doctest::Approx(y[i].breakdown.genre_sim).epsilon(1e-6));
  }
}

TEST_CASE("recommend errors and warnings") {
  Artifacts a(20);
  WarningCapture warnings;
  Recommender rec(a.data.source.items, a.index, a.encoder, a.genre_model, a.checkpoint, a.tfidf);
  try {
    (void)rec.recommend({{"no-such-id"}, 3}, {});
    FAIL("expected UnknownSeedId");
  } catch (const UnknownSeedId& e) {
    CHECK(e.id() == "no-such-id");
  }
  CHECK_THROWS_AS(rec.recommend({{a.data.source.items[0].id}, 0}, {}), InvalidConfig);
  auto all = rec.recommend({{a.data.source.items[0].id}, 500}, {});
  CHECK(all.size() == 20);
  CHECK_FALSE(warnings.messages.empty());
  const auto& s = a.data.source.items;
  (void)rec.recommend({{s[0].id, s[1].id, s[2].id, s[3].id}, 2}, {});
  CHECK(warnings.messages.size() == 2);

  FusionCheckpoint other{init_params(1234), 1234, 0};
  CHECK_THROWS_AS(Recommender(a.data.source.items, a.index, a.encoder, a.genre_model, other, a.tfidf),
                  IncompatibleIndex);
}
