#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fusionrec/catalog.hpp"
#include "fusionrec/encoder.hpp"
#include "fusionrec/fusion.hpp"
#include "fusionrec/genre_model.hpp"

namespace fusionrec {

// Raw per-item inputs to the fusion network, one column per item.
struct FeatureTable {
  std::vector<std::string> ids;
  ColMatrix<float> text;   // text_dim x n
  ColMatrix<float> genre;  // genre_dim x n

  std::unordered_map<std::string, std::size_t> index;

  std::optional<std::size_t> position(const std::string& id) const;
};

/// Encodes every item. Missing file-backed embeddings are collected and
/// reported together in one MissingEmbedding.
FeatureTable compute_features(const std::vector<Item>& items, const EncoderProvider& encoder,
                              const GenreEmbeddingModel& genre_model);

}  // namespace fusionrec
