#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fusionrec {

inline constexpr std::uint32_t kGenreDim = 50;

struct GenreTrainConfig {
  std::uint32_t dim = kGenreDim;
  std::uint32_t window = 2;
  std::uint32_t negatives = 5;
  std::uint32_t epochs = 15;
  double lr = 0.05;  // decays linearly to zero over the run
  std::uint32_t min_n = 3;
  std::uint32_t max_n = 6;
  std::uint64_t buckets = 1ULL << 17;
  std::uint64_t seed = 7;
};

/// Character n-grams of `<token>` with lengths in [min_n, max_n], counted in
/// code points. Single boundary characters are never emitted.
std::vector<std::string> char_ngrams(std::string_view token, std::uint32_t min_n,
                                     std::uint32_t max_n);

// Subword skip-gram genre embeddings. A token's vector is the mean of its own
// input vector (when in vocabulary) and the bucket vectors of its hashed
// character n-grams, so unseen genres still land near related ones.
class GenreEmbeddingModel {
 public:
  GenreEmbeddingModel(std::uint32_t dim, std::uint32_t min_n, std::uint32_t max_n,
                      std::uint64_t buckets, std::uint64_t seed);

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t min_n() const noexcept { return min_n_; }
  std::uint32_t max_n() const noexcept { return max_n_; }
  std::uint64_t bucket_count() const noexcept { return buckets_; }
  std::uint64_t seed() const noexcept { return seed_; }

  const std::vector<std::string>& vocabulary() const noexcept { return vocab_; }
  bool contains(std::string_view token) const;

  /// Raw (uncomposed) input vector of an in-vocabulary token.
  std::span<const float> token_vector(std::size_t index) const;
  std::span<float> token_vector(std::size_t index);
  std::span<const float> bucket_vector(std::uint64_t bucket) const;
  std::span<float> bucket_vector(std::uint64_t bucket);

  std::uint64_t bucket_of(std::string_view ngram) const;
  /// Bucket ids for all n-grams of a token, in enumeration order.
  std::vector<std::uint64_t> subword_buckets(std::string_view token) const;

  std::vector<float> embed(std::string_view token) const;
  /// Mean of per-token embeddings. Throws EmptyGenreList on an empty list.
  std::vector<float> embed_set(std::span<const std::string> genres) const;

  std::size_t add_token(std::string token);

  std::string serialize() const;
  static GenreEmbeddingModel deserialize(std::string_view bytes);
  void save(const std::string& path) const;
  static GenreEmbeddingModel load(const std::string& path);

  bool operator==(const GenreEmbeddingModel& other) const;

 private:
  friend GenreEmbeddingModel train_genre_model(
      const std::vector<std::vector<std::string>>& sequences, const GenreTrainConfig& config);

  std::uint32_t dim_;
  std::uint32_t min_n_;
  std::uint32_t max_n_;
  std::uint64_t buckets_;
  std::uint64_t seed_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> token_vectors_;   // vocab x dim
  std::vector<float> bucket_vectors_;  // buckets x dim
};

/// Throws EmptyCorpus when no sequence has two tokens and DegenerateCorpus
/// when fewer than two distinct tokens exist.
GenreEmbeddingModel train_genre_model(const std::vector<std::vector<std::string>>& sequences,
                                      const GenreTrainConfig& config);

}  // namespace fusionrec
