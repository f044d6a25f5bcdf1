#pragma once

// Independent reference implementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fusionrec/catalog.hpp"
#include "fusionrec/encoder.hpp"
#include "fusionrec/fusion.hpp"
#include "fusionrec/genre_model.hpp"
#include "fusionrec/index.hpp"
#include "fusionrec/recommender.hpp"
#include "fusionrec/scoring.hpp"

namespace fusionrec::testing {

// Dense TF-IDF straight from the formula: smooth idf, raw counts, L2 norm.
struct DenseTfidf {
  std::map<std::string, double> idf;

  explicit DenseTfidf(const std::vector<std::string>& docs) {
    std::map<std::string, int> df;
    for (const auto& d : docs) {
      auto toks = tfidf_tokens(d);
      std::sort(toks.begin(), toks.end());
      toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
      for (const auto& t : toks) df[t]++;
    }
    const double n = static_cast<double>(docs.size());
    for (const auto& [t, c] : df) idf[t] = std::log((1 + n) / (1 + c)) + 1;
  }

  std::vector<double> transform(const std::string& text) const {
    std::vector<double> row(idf.size(), 0.0);
    for (const auto& t : tfidf_tokens(text)) {
      auto it = idf.find(t);
      if (it == idf.end()) continue;
      row[static_cast<std::size_t>(std::distance(idf.begin(), it))] += 1.0;
    }
    double sq = 0;
    std::size_t k = 0;
    for (const auto& [t, w] : idf) {
      row[k] *= w;
      sq += row[k] * row[k];
      ++k;
    }
    if (sq > 0)
      for (auto& x : row) x /= std::sqrt(sq);
    return row;
  }
};

inline std::vector<double> densify(const SparseVector& v, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < v.nnz(); ++i) out[v.indices[i]] = v.weights[i];
  return out;
}

// Scores every index row from the raw artifacts and stable-sorts them all.
inline std::vector<std::pair<std::string, double>> brute_force_ranking(
    const std::vector<Item>& source, const FeatureIndex& index, const EncoderProvider& encoder,
    const GenreEmbeddingModel& genre_model, const FusionCheckpoint& checkpoint,
    const TfidfModel& tfidf, std::vector<std::string> seeds, const ScoreWeights& w) {
  std::sort(seeds.begin(), seeds.end());
  std::vector<std::vector<float>> fused, genre;
  std::string desc;
  for (const auto& id : seeds) {
    const auto it = std::find_if(source.begin(), source.end(), [&](const Item& x) { return x.id == id; });
    auto e = encoder.encode(*it);
    auto g = genre_model.embed_set(it->genres);
    const Vec<float> ev = Eigen::Map<Vec<float>>(e.data(), static_cast<Eigen::Index>(e.size()));
    const Vec<float> gv = Eigen::Map<Vec<float>>(g.data(), static_cast<Eigen::Index>(g.size()));
    const Vec<float> f = forward<float>(checkpoint.params, ev, gv);
    fused.emplace_back(f.data(), f.data() + f.size());
    genre.push_back(g);
    if (!desc.empty()) desc += "\n";
    desc += it->description;
  }
  const auto pf = combine_seed_features(fused);
  const auto pg = combine_seed_features(genre);
  const auto pt = tfidf.transform(desc);
  std::vector<std::pair<std::string, double>> all;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const double s = w.fusion * cosine(pf, index.fused_row(i)) + w.genre * cosine(pg, index.genre_row(i)) +
                     w.tfidf * sparse_cosine(pt, index.tfidf_rows[i]);
    all.emplace_back(index.item_ids[i], s);
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  return all;
}

}  // namespace fusionrec::testing
