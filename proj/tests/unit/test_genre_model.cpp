#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fusionrec/errors.hpp"
#include "fusionrec/genre_model.hpp"
#include "fusionrec/scoring.hpp"
#include "fusionrec/synthetic.hpp"
#include "test_helpers.hpp"

using namespace fusionrec;

namespace {

GenreTrainConfig small_config(std::uint64_t seed) {
  GenreTrainConfig cfg;
  cfg.buckets = 4096;
  cfg.seed = seed;
  return cfg;
}

double cos(const std::vector<float>& a, const std::vector<float>& b) { return cosine(a, b); }

std::vector<std::vector<std::string>> synthetic_genre_corpus() {
  auto ds = synthetic::generate({});
  std::vector<std::vector<std::string>> corpus;
  for (const auto* cat : {&ds.source, &ds.target})
    for (const auto& item : cat->items) corpus.push_back(item.genres);
  return corpus;
}

}  // namespace

TEST_CASE("char n-grams of war") {
  auto grams = char_ngrams("war", 3, 6);
  std::set<std::string> got(grams.begin(), grams.end());
  CHECK(got == std::set<std::string>{"<wa", "war", "ar>", "<war", "war>", "<war>"});
  CHECK(grams.size() == 6);
}

TEST_CASE("char n-grams count code points, not bytes") {
  auto grams = char_ngrams("мир", 3, 3);
  CHECK(grams == std::vector<std::string>{"<ми", "мир", "ир>"});
}

TEST_CASE("training rejects empty and degenerate corpora") {
  CHECK_THROWS_AS(train_genre_model({}, small_config(1)), EmptyCorpus);
  CHECK_THROWS_AS(train_genre_model({{"solo"}, {"pair"}}, small_config(1)), EmptyCorpus);
  CHECK_THROWS_AS(train_genre_model({{"same", "same"}}, small_config(1)), DegenerateCorpus);
}

TEST_CASE("training is bit-deterministic per seed") {
  std::vector<std::vector<std::string>> corpus{{"sci-fi", "horror"}, {"sci-fi", "thriller"}};
  auto a = train_genre_model(corpus, small_config(3));
  auto b = train_genre_model(corpus, small_config(3));
  CHECK(a.serialize() == b.serialize());
  auto c = train_genre_model(corpus, small_config(4));
  CHECK(a.serialize() != c.serialize());
}

TEST_CASE("co-occurring genres end up closer than random tokens") {
  // Oracle: compare against 20 random-token baselines over several seeds.
  std::vector<std::vector<std::string>> corpus{{"sci-fi", "horror"}, {"sci-fi", "thriller"}};
  int wins = 0;
  int total = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto cfg = small_config(seed);
    cfg.epochs = 50;
    auto model = train_genre_model(corpus, cfg);
    const auto horror = model.embed("horror");
    const double sim = cos(horror, model.embed("thriller"));
    for (int r = 0; r < 20; ++r) {
      const auto random_token = "zq" + std::to_string(seed) + "x" + std::to_string(r * 7919);
      wins += sim > cos(horror, model.embed(random_token));
      ++total;
    }
  }
  CHECK(wins >= total * 9 / 10);
}

TEST_CASE("embed composes token and subword vectors") {
  std::vector<std::vector<std::string>> corpus{{"war", "drama"}, {"war", "history"}};
  auto model = train_genre_model(corpus, small_config(9));
  const auto v = model.embed("war");
  REQUIRE(v.size() == kGenreDim);
  // Recompute the in-vocabulary composition by hand.
  const auto& vocab = model.vocabulary();
  const auto idx = static_cast<std::size_t>(std::find(vocab.begin(), vocab.end(), "war") - vocab.begin());
  const auto buckets = model.subword_buckets("war");
  for (std::size_t k = 0; k < kGenreDim; ++k) {
    double acc = model.token_vector(idx)[k];
    for (auto b : buckets) acc += model.bucket_vector(b)[k];
    CHECK(v[k] == doctest::Approx(acc / (buckets.size() + 1)).epsilon(1e-6));
  }
  CHECK(model.embed("war") == v);
  // OOV: mean of bucket vectors only.
  const auto oov = model.embed("warfare");
  const auto ob = model.subword_buckets("warfare");
  double acc0 = 0.0;
  for (auto b : ob) acc0 += model.bucket_vector(b)[0];
  CHECK(oov[0] == doctest::Approx(acc0 / ob.size()).epsilon(1e-6));
  for (float x : oov) CHECK(std::isfinite(x));
}

TEST_CASE("embed_set is the mean and order invariant") {
  std::vector<std::vector<std::string>> corpus{{"war", "drama"}, {"war", "history"}};
  auto model = train_genre_model(corpus, small_config(9));
  const std::vector<std::string> one{"drama"};
  CHECK(model.embed_set(one) == model.embed("drama"));
  const std::vector<std::string> ab{"war", "drama"}, ba{"drama", "war"};
  CHECK(model.embed_set(ab) == model.embed_set(ba));
  const auto v = model.embed("war"), w = model.embed("drama");
  const auto m = model.embed_set(ab);
  for (std::size_t k = 0; k < kGenreDim; ++k)
    CHECK(m[k] == doctest::Approx((static_cast<double>(v[k]) + w[k]) / 2).epsilon(1e-6));
  const std::vector<std::string> doubled{"war", "drama", "war", "drama"};
  const auto md = model.embed_set(doubled);
  for (std::size_t k = 0; k < kGenreDim; ++k) CHECK(md[k] == doctest::Approx(m[k]).epsilon(1e-6));
  CHECK_THROWS_AS(model.embed_set(std::vector<std::string>{}), EmptyGenreList);
}

TEST_CASE("synthetic corpus: OOV romantic-comedy is nearer romance than western") {
  auto cfg = small_config(7);
  auto model = train_genre_model(synthetic_genre_corpus(), cfg);
  const auto rc = model.embed("romantic-comedy");
  CHECK_FALSE(model.contains("romantic-comedy"));
  CHECK(cos(rc, model.embed("romance")) > cos(rc, model.embed("western")));
}

TEST_CASE("synthetic corpus: intra-cluster cosine exceeds inter-cluster cosine") {
  auto model = train_genre_model(synthetic_genre_corpus(), small_config(7));
  double intra = 0, inter = 0;
  int n_intra = 0, n_inter = 0;
  for (std::size_t a = 0; a < synthetic::kClusters; ++a)
    for (std::size_t b = 0; b < synthetic::kClusters; ++b)
      for (const auto& ga : synthetic::cluster_genres(a))
        for (const auto& gb : synthetic::cluster_genres(b)) {
          if (ga == gb) continue;
          const double c = cos(model.embed(ga), model.embed(gb));
          (a == b ? intra : inter) += c;
          (a == b ? n_intra : n_inter) += 1;
        }
  CHECK(intra / n_intra > inter / n_inter);
}

TEST_CASE("checkpoint round-trips and rejects corruption") {
  std::vector<std::vector<std::string>> corpus{{"war", "drama"}, {"war", "history"}};
  auto model = train_genre_model(corpus, small_config(2));
  const auto bytes = model.serialize();
  auto back = GenreEmbeddingModel::deserialize(bytes);
  CHECK(back == model);
  CHECK(back.serialize() == bytes);
  CHECK(back.seed() == 2);
  // Layout: magic, u32 dim, u32 min_n, u32 max_n, u64 B, u64 vocab, entries, table, u64 seed.
  std::size_t expected = 8 + 4 * 3 + 8 + 8 + 4096 * 50 * 4 + 8;
  for (const auto& t : model.vocabulary()) expected += 2 + t.size() + 50 * 4;
  CHECK(bytes.size() == expected);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(GenreEmbeddingModel::deserialize(bad), CorruptFile);
  CHECK_THROWS_AS(GenreEmbeddingModel::deserialize(bytes.substr(0, bytes.size() - 3)), CorruptFile);
  CHECK_THROWS_AS(GenreEmbeddingModel::deserialize(bytes + "x"), CorruptFile);
}
