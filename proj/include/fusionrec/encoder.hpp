#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fusionrec/catalog.hpp"

namespace fusionrec {

inline constexpr std::uint32_t kTextDim = 768;

struct TextEmbedding {
  std::vector<float> vector;
  std::string provider_id;
};

// Source of description embeddings. Implementations must be deterministic.
class EncoderProvider {
 public:
  virtual ~EncoderProvider() = default;
  virtual std::string provider_id() const = 0;
  virtual std::uint32_t dim() const = 0;
  virtual std::vector<float> encode(const Item& item) const = 0;
};

/// Throws EmptyInput for a blank description; otherwise delegates to the provider.
TextEmbedding encode_text(const EncoderProvider& provider, const Item& item);

// Signed feature hashing of unigrams and bigrams over the first 128 tokens,
// L2-normalized. A description with no tokens maps to e_0.
std::vector<float> fallback_encode(std::string_view description, std::uint32_t dim = kTextDim);

class FallbackEncoder final : public EncoderProvider {
 public:
  explicit FallbackEncoder(std::uint32_t dim = kTextDim) : dim_(dim) {}
  std::string provider_id() const override { return "fallback-hash-v1"; }
  std::uint32_t dim() const override { return dim_; }
  std::vector<float> encode(const Item& item) const override {
    return fallback_encode(item.description, dim_);
  }

 private:
  std::uint32_t dim_;
};

// In-memory view of an LFREMB1 file: `count` records of `dim` floats.
struct EmbeddingTable {
  std::uint32_t dim = kTextDim;
  std::vector<std::string> ids;
  std::vector<float> values;  // ids.size() x dim, row-major

  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  void append(std::string id, std::span<const float> vec);
  bool operator==(const EmbeddingTable&) const = default;
};

std::string serialize_embeddings(const EmbeddingTable& table);
EmbeddingTable deserialize_embeddings(std::string_view bytes);
void save_embeddings(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_embeddings(const std::string& path);

// Serves vectors produced offline by the transformer exporter, keyed by item id.
class FileEmbeddingProvider final : public EncoderProvider {
 public:
  explicit FileEmbeddingProvider(EmbeddingTable table);
  static FileEmbeddingProvider from_file(const std::string& path);

  std::string provider_id() const override { return id_; }
  std::uint32_t dim() const override { return table_.dim; }
  /// Throws MissingEmbedding when the item id is not in the table.
  std::vector<float> encode(const Item& item) const override;
  bool contains(std::string_view id) const { return pos_.contains(std::string(id)); }

 private:
  EmbeddingTable table_;
  std::unordered_map<std::string, std::size_t> pos_;
  std::string id_;
};

}  // namespace fusionrec
