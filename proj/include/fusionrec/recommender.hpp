#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fusionrec/catalog.hpp"
#include "fusionrec/encoder.hpp"
#include "fusionrec/fusion.hpp"
#include "fusionrec/genre_model.hpp"
#include "fusionrec/index.hpp"
#include "fusionrec/scoring.hpp"

namespace fusionrec {

struct Recommendation {
  std::string target_id;
  std::size_t rank = 0;  // 1-based
  ScoreBreakdown breakdown;

  bool operator==(const Recommendation&) const = default;
};

struct SeedQuery {
  std::vector<std::string> seed_ids;  // 1-3 expected; more is allowed with a warning
  std::size_t k = 10;
};

/// Componentwise mean. Throws EmptyInput / ShapeMismatch.
std::vector<float> combine_seed_features(std::span<const std::vector<float>> features);

// Everything the seed side contributes to scoring.
struct SeedProfile {
  std::vector<float> fused;  // mean fused feature of the seeds
  std::vector<float> genre;  // mean genre-set vector
  std::vector<float> text;   // mean raw text embedding
  SparseVector tfidf;        // TF-IDF of the concatenated seed descriptions
};

/// Sorts by combined score descending, ties by id ascending, and keeps k.
std::vector<Recommendation> rank_top_k(std::span<const std::string> ids,
                                       std::span<const ScoreBreakdown> scores, std::size_t k);

// Read-only scorer over a loaded index. Safe for concurrent queries.
class Recommender {
 public:
  /// Throws IncompatibleIndex when the index was built from other artifacts.
  Recommender(const std::vector<Item>& source, const FeatureIndex& index,
              const EncoderProvider& encoder, const GenreEmbeddingModel& genre_model,
              const FusionCheckpoint& checkpoint, const TfidfModel& tfidf);

  /// Throws UnknownSeedId / EmptyInput. Seeds are processed in sorted order
  /// so the profile does not depend on the order they were given in.
  SeedProfile seed_profile(std::span<const std::string> seed_ids) const;

  /// One breakdown per index row, in index order.
  std::vector<ScoreBreakdown> score_all(const SeedProfile& profile,
                                        const ScoreWeights& weights) const;

  std::vector<Recommendation> recommend(const SeedQuery& query, const ScoreWeights& weights) const;

  const FeatureIndex& index() const noexcept { return index_; }
  const std::vector<Item>& source() const noexcept { return source_; }

 private:
  const std::vector<Item>& source_;
  ItemLookup lookup_;
  const FeatureIndex& index_;
  const EncoderProvider& encoder_;
  const GenreEmbeddingModel& genre_model_;
  const FusionCheckpoint& checkpoint_;
  const TfidfModel& tfidf_;
};

std::vector<Recommendation> recommend(const SeedQuery& query, const std::vector<Item>& source,
                                      const FeatureIndex& index, const EncoderProvider& encoder,
                                      const GenreEmbeddingModel& genre_model,
                                      const FusionCheckpoint& checkpoint, const TfidfModel& tfidf,
                                      const ScoreWeights& weights);

inline const ScoreBreakdown& explain(const Recommendation& r) { return r.breakdown; }

}  // namespace fusionrec
