#include "fusionrec/features.hpp"

namespace fusionrec {

std::optional<std::size_t> FeatureTable::position(const std::string& id) const {
  auto it = index.find(id);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

FeatureTable compute_features(const std::vector<Item>& items, const EncoderProvider& encoder,
                              const GenreEmbeddingModel& genre_model) {
  const auto n = static_cast<Eigen::Index>(items.size());
  FeatureTable t;
  t.text.resize(encoder.dim(), n);
  t.genre.resize(genre_model.dim(), n);
  std::vector<std::string> missing;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& item = items[static_cast<std::size_t>(i)];
    t.ids.push_back(item.id);
    t.index.emplace(item.id, static_cast<std::size_t>(i));
    try {
      auto e = encode_text(encoder, item).vector;
      detail::require_len(static_cast<Eigen::Index>(e.size()), encoder.dim(), "text embedding");
      t.text.col(i) = Eigen::Map<const Eigen::VectorXf>(e.data(), encoder.dim());
    } catch (const MissingEmbedding&) {
      missing.push_back(item.id);
      continue;
    }
    auto g = genre_model.embed_set(item.genres);
    t.genre.col(i) = Eigen::Map<const Eigen::VectorXf>(g.data(), genre_model.dim());
  }
  if (!missing.empty()) throw MissingEmbedding(std::move(missing));
  return t;
}

}  // namespace fusionrec
