#include <doctest.h>

#include <cmath>

#include "fusionrec/errors.hpp"
#include "fusionrec/rng.hpp"
#include "fusionrec/scoring.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace fusionrec;
using fusionrec::testing::DenseTfidf;
using fusionrec::testing::TempDir;

namespace {

std::string random_doc(Rng& rng, std::size_t vocab) {
  std::string s;
  for (auto n = rng.below(20); n > 0; --n) s += "w" + std::to_string(rng.below(vocab)) + " ";
  return s;
}

}  // namespace

TEST_CASE("cosine examples") {
  const std::vector<float> v{0.2f, -3.0f, 1.5f};
  CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(std::vector<float>{1, 0}, std::vector<float>{0, 1}) == 0.0);
  CHECK(cosine(std::vector<double>{1, 1}, std::vector<double>{1, 0}) ==
        doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(cosine(std::vector<float>{0, 0}, std::vector<float>{1, 0}) == 0.0);
  CHECK_THROWS_AS(cosine(std::vector<float>{1}, std::vector<float>{1, 0}), ShapeMismatch);
}

TEST_CASE("tf-idf hand example") {
  const std::vector<std::string> corpus{"a b", "a c"};
  auto model = TfidfModel::fit(corpus);
  CHECK(model.doc_count() == 2);
  CHECK(model.terms() == std::vector<std::string>{"a", "b", "c"});
  CHECK(model.idf()[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(model.idf()[1] - 1.4054651081081644) <= 1e-12);
  auto row = model.transform("a b");
  REQUIRE(row.indices == std::vector<std::uint32_t>{0, 1});
  CHECK(std::abs(row.weights[0] - 0.5797386715376657) <= 1e-12);
  CHECK(std::abs(row.weights[1] - 0.8148024746671689) <= 1e-12);
  CHECK(model.transform("").empty());
  CHECK(model.transform("zzz unknown").empty());
  CHECK(model.index_of("zzz") == -1);
  CHECK(model.transform("a zzz") == model.transform("a"));
  CHECK(sparse_cosine(row, row) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(TfidfModel::fit(std::vector<std::string>{}), EmptyCorpus);
}

TEST_CASE("tf-idf matches a dense reference on random corpora") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::string> docs;
    for (int d = 0; d < 100; ++d) docs.push_back(random_doc(rng, 60));
    auto model = TfidfModel::fit(docs);
    DenseTfidf ref(docs);
    REQUIRE(model.vocabulary_size() == ref.idf.size());
    std::size_t k = 0;
    for (const auto& [t, w] : ref.idf) {
      CHECK(model.terms()[k] == t);
      CHECK(std::abs(model.idf()[k] - w) <= 1e-9);
      ++k;
    }
    for (int q = 0; q < 20; ++q) {
      const auto doc = q < 10 ? docs[rng.below(docs.size())] : random_doc(rng, 80);
      const auto dense = ref.transform(doc);
      const auto sparse = model.transform(doc);
      std::vector<double> expanded(dense.size(), 0.0);
      for (std::size_t i = 0; i < sparse.nnz(); ++i) {
        if (i > 0) CHECK(sparse.indices[i] > sparse.indices[i - 1]);
        expanded[sparse.indices[i]] = sparse.weights[i];
      }
      for (std::size_t i = 0; i < dense.size(); ++i) CHECK(std::abs(expanded[i] - dense[i]) <= 1e-9);
    }
  }
}

TEST_CASE("tf-idf model round-trips through its file format") {
  const std::vector<std::string> corpus{"a b", "a c", "Война и мир"};
  auto model = TfidfModel::fit(corpus);
  TempDir dir;
  model.save(dir.file("t.bin"));
  auto back = TfidfModel::load(dir.file("t.bin"));
  CHECK(back == model);
  CHECK(back.fingerprint() == model.fingerprint());
  CHECK(back.transform("мир a") == model.transform("мир a"));
  const auto bytes = model.serialize();
  CHECK_THROWS_AS(TfidfModel::deserialize(bytes.substr(0, bytes.size() - 2)), CorruptFile);
  CHECK(TfidfModel::fit(std::vector<std::string>{"a b"}).fingerprint() != model.fingerprint());
}

TEST_CASE("combined score") {
  CHECK(combined_score(0.9, 0.6, 0.3, {}).combined == doctest::Approx(0.6).epsilon(1e-12));
  auto text_only = combined_score(0.9, 0.6, 0.3, {1, 0, 0});
  CHECK(text_only.combined == 0.9);
  CHECK(text_only.genre_sim == 0.6);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(), b = rng.uniform() * (1 - a);
    const ScoreWeights w{a, b, 1 - a - b};
    const double s = rng.uniform(-1, 1);
    CHECK(combined_score(s, s, s, w).combined == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("score weights validation and parsing") {
  CHECK(ScoreWeights::parse("1,0,0") == ScoreWeights{1, 0, 0});
  CHECK(ScoreWeights::parse("0.5, 0.25, 0.25") == ScoreWeights{0.5, 0.25, 0.25});
  CHECK_THROWS_AS(ScoreWeights::parse("1,1,1"), InvalidWeights);
  CHECK_THROWS_AS(ScoreWeights::parse("-0.5,1,0.5"), InvalidWeights);
  CHECK_THROWS_AS(ScoreWeights::parse("1,0"), InvalidWeights);
  CHECK_THROWS_AS(ScoreWeights::parse("a,b,c"), InvalidWeights);
  CHECK_NOTHROW(ScoreWeights{}.validate());
}
