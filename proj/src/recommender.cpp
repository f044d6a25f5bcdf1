#include "fusionrec/recommender.hpp"

#include <algorithm>
#include <numeric>

#include "fusionrec/log.hpp"

namespace fusionrec {

std::vector<float> combine_seed_features(std::span<const std::vector<float>> features) {
  if (features.empty()) throw EmptyInput("no seed features to combine");
  const std::size_t d = features.front().size();
  std::vector<double> acc(d, 0.0);
  for (const auto& f : features) {
    if (f.size() != d) throw ShapeMismatch("seed features differ in length");
    for (std::size_t k = 0; k < d; ++k) acc[k] += f[k];
  }
  std::vector<float> out(d);
  const double inv = 1.0 / static_cast<double>(features.size());
  for (std::size_t k = 0; k < d; ++k) out[k] = static_cast<float>(acc[k] * inv);
  return out;
}

std::vector<Recommendation> rank_top_k(std::span<const std::string> ids,
                                       std::span<const ScoreBreakdown> scores, std::size_t k) {
  if (ids.size() != scores.size()) throw LengthMismatch("ids and scores differ in length");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a].combined != scores[b].combined) return scores[a].combined > scores[b].combined;
    return ids[a] < ids[b];
  };
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    better);
  std::vector<Recommendation> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) out.push_back({ids[order[r]], r + 1, scores[order[r]]});
  return out;
}

Recommender::Recommender(const std::vector<Item>& source, const FeatureIndex& index,
                         const EncoderProvider& encoder, const GenreEmbeddingModel& genre_model,
                         const FusionCheckpoint& checkpoint, const TfidfModel& tfidf)
    : source_(source),
      lookup_(source),
      index_(index),
      encoder_(encoder),
      genre_model_(genre_model),
      checkpoint_(checkpoint),
      tfidf_(tfidf) {
  if (!verify_compatibility(index, checkpoint, tfidf))
    throw IncompatibleIndex("index fingerprints do not match the fusion checkpoint / TF-IDF model");
  if (index.fused.cols() != checkpoint.params.text_dim() ||
      index.genre.cols() != genre_model.dim() || encoder.dim() != checkpoint.params.text_dim())
    throw IncompatibleIndex("index dimensions do not match the loaded models");
  if (index.provider_id != encoder.provider_id())
    warn("index was built with provider '" + index.provider_id + "', querying with '" +
         encoder.provider_id() + "'");
}

SeedProfile Recommender::seed_profile(std::span<const std::string> seed_ids) const {
  if (seed_ids.empty()) throw EmptyInput("no seed ids given");
  if (seed_ids.size() > 3)
    warn("more than 3 seeds given (" + std::to_string(seed_ids.size()) + ")");
  std::vector<std::string> ids(seed_ids.begin(), seed_ids.end());
  std::sort(ids.begin(), ids.end());

  const auto& params = checkpoint_.params;
  std::vector<std::vector<float>> fused, genre, text;
  std::string descriptions;
  for (const auto& id : ids) {
    const Item* item = lookup_.find(id);
    if (!item) throw UnknownSeedId(id);
    auto e = encode_text(encoder_, *item).vector;
    auto g = genre_model_.embed_set(item->genres);
    Eigen::VectorXf ev = Eigen::Map<const Eigen::VectorXf>(e.data(), static_cast<Eigen::Index>(e.size()));
    Eigen::VectorXf gv = Eigen::Map<const Eigen::VectorXf>(g.data(), static_cast<Eigen::Index>(g.size()));
    Eigen::VectorXf f = forward<float>(params, ev, gv);
    fused.emplace_back(f.data(), f.data() + f.size());
    genre.push_back(std::move(g));
    text.push_back(std::move(e));
    if (!descriptions.empty()) descriptions.push_back('\n');
    descriptions += item->description;
  }
  return {combine_seed_features(fused), combine_seed_features(genre), combine_seed_features(text),
          tfidf_.transform(descriptions)};
}

std::vector<ScoreBreakdown> Recommender::score_all(const SeedProfile& profile,
                                                   const ScoreWeights& weights) const {
  weights.validate();
  std::vector<ScoreBreakdown> out;
  out.reserve(index_.size());
  for (std::size_t i = 0; i < index_.size(); ++i) {
    out.push_back(combined_score(cosine(profile.fused, index_.fused_row(i)),
                                 cosine(profile.genre, index_.genre_row(i)),
                                 sparse_cosine(profile.tfidf, index_.tfidf_rows[i]), weights));
  }
  return out;
}

std::vector<Recommendation> Recommender::recommend(const SeedQuery& query,
                                                   const ScoreWeights& weights) const {
  if (query.k < 1) throw InvalidConfig("k must be >= 1");
  if (query.k > index_.size())
    warn("k=" + std::to_string(query.k) + " exceeds index size " + std::to_string(index_.size()) +
         "; returning all rows");
  const auto scores = score_all(seed_profile(query.seed_ids), weights);
  return rank_top_k(index_.item_ids, scores, query.k);
}

std::vector<Recommendation> recommend(const SeedQuery& query, const std::vector<Item>& source,
                                      const FeatureIndex& index, const EncoderProvider& encoder,
                                      const GenreEmbeddingModel& genre_model,
                                      const FusionCheckpoint& checkpoint, const TfidfModel& tfidf,
                                      const ScoreWeights& weights) {
  return Recommender(source, index, encoder, genre_model, checkpoint, tfidf)
      .recommend(query, weights);
}

}  // namespace fusionrec
