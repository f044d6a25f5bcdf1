#pragma once

#include <string>
#include <vector>

#include "fusionrec/encoder.hpp"
#include "fusionrec/fusion.hpp"
#include "fusionrec/genre_model.hpp"
#include "fusionrec/index.hpp"
#include "fusionrec/scoring.hpp"
#include "fusionrec/synthetic.hpp"

namespace fusionrec::testing {

// Small but complete set of artifacts over a synthetic dataset. The fusion
// parameters are freshly initialized, which is enough for retrieval tests.
struct Artifacts {
  synthetic::Dataset data;
  FallbackEncoder encoder;
  GenreEmbeddingModel genre_model;
  FusionCheckpoint checkpoint;
  TfidfModel tfidf;
  FeatureIndex index;

  explicit Artifacts(std::size_t items = 60, std::uint64_t seed = 7)
      : data(make_data(items, seed)),
        genre_model(make_genre_model(data, seed)),
        checkpoint{init_params(seed), seed, 0},
        tfidf(make_tfidf(data)),
        index(build_index(data.target.items, encoder, genre_model, checkpoint, tfidf)) {}

  static synthetic::Dataset make_data(std::size_t items, std::uint64_t seed) {
    synthetic::Config cfg;
    cfg.source_items = items;
    cfg.target_items = items;
    cfg.users = items / 3;
    cfg.seed = seed;
    return synthetic::generate(cfg);
  }

  static GenreEmbeddingModel make_genre_model(const synthetic::Dataset& d, std::uint64_t seed) {
    std::vector<std::vector<std::string>> corpus;
    for (const auto& it : d.source.items) corpus.push_back(it.genres);
    for (const auto& it : d.target.items) corpus.push_back(it.genres);
    GenreTrainConfig cfg;
    cfg.buckets = 2048;
    cfg.epochs = 5;
    cfg.seed = seed;
    return train_genre_model(corpus, cfg);
  }

  static TfidfModel make_tfidf(const synthetic::Dataset& d) {
    std::vector<std::string> docs;
    for (const auto& it : d.source.items) docs.push_back(it.description);
    for (const auto& it : d.target.items) docs.push_back(it.description);
    return TfidfModel::fit(docs);
  }
};

}  // namespace fusionrec::testing
