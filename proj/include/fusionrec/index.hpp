#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fusionrec/catalog.hpp"
#include "fusionrec/encoder.hpp"
#include "fusionrec/fusion.hpp"
#include "fusionrec/genre_model.hpp"
#include "fusionrec/scoring.hpp"

namespace fusionrec {

// Precomputed target-domain features. Row i of every table belongs to
// item_ids[i]. TF-IDF weights are held at f32 precision so that a loaded
// index compares equal to the one that was saved.
struct FeatureIndex {
  std::vector<std::string> item_ids;
  RowMatrix<float> fused;  // n x text_dim
  RowMatrix<float> genre;  // n x genre_dim
  std::vector<SparseVector> tfidf_rows;
  std::string provider_id;
  std::uint64_t model_fingerprint = 0;
  std::uint64_t tfidf_fingerprint = 0;

  std::size_t size() const noexcept { return item_ids.size(); }
  std::span<const float> fused_row(std::size_t i) const {
    return {fused.data() + i * fused.cols(), static_cast<std::size_t>(fused.cols())};
  }
  std::span<const float> genre_row(std::size_t i) const {
    return {genre.data() + i * genre.cols(), static_cast<std::size_t>(genre.cols())};
  }
  bool operator==(const FeatureIndex&) const = default;
};

struct IndexBuildConfig {
  std::uint32_t batch_size = 32;
  std::uint32_t parallelism = 1;
};

/// Rows come out in catalog order whatever the parallelism. Every item with
/// no embedding is collected into a single MissingEmbedding.
FeatureIndex build_index(const std::vector<Item>& target, const EncoderProvider& encoder,
                         const GenreEmbeddingModel& genre_model, const FusionCheckpoint& checkpoint,
                         const TfidfModel& tfidf, const IndexBuildConfig& config = {});

std::string serialize_index(const FeatureIndex& index);
/// Throws CorruptIndex on bad magic, unsupported version or truncation.
FeatureIndex deserialize_index(std::string_view bytes);
void save_index(const FeatureIndex& index, const std::string& path);
FeatureIndex load_index(const std::string& path);

/// Header + ids + dense rows + sparse payload, in bytes.
std::size_t expected_index_size(const FeatureIndex& index);

bool verify_compatibility(const FeatureIndex& index, const FusionCheckpoint& checkpoint,
                          const TfidfModel& tfidf);

}  // namespace fusionrec
