#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fusionrec {

/// a.b / (|a||b|), accumulated in double. Returns 0 when either norm is
/// below 1e-12. Throws ShapeMismatch on differing lengths.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

// Sparse row with strictly increasing indices.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> weights;

  bool empty() const noexcept { return indices.empty(); }
  std::size_t nnz() const noexcept { return indices.size(); }
  bool operator==(const SparseVector&) const = default;
};

double sparse_dot(const SparseVector& a, const SparseVector& b);
/// Cosine of two sparse rows; 0 when either is empty or near-zero.
double sparse_cosine(const SparseVector& a, const SparseVector& b);

// Unigram TF-IDF with smooth idf: ln((1 + N) / (1 + df)) + 1.
// Terms are indexed in lexicographic order.
class TfidfModel {
 public:
  /// Throws EmptyCorpus on an empty corpus.
  static TfidfModel fit(std::span<const std::string> corpus);

  /// Raw term count times idf, L2-normalized. Unknown terms are dropped.
  SparseVector transform(std::string_view text) const;

  std::size_t doc_count() const noexcept { return doc_count_; }
  std::size_t vocabulary_size() const noexcept { return terms_.size(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<double>& idf() const noexcept { return idf_; }
  /// Column index of a term, or -1.
  std::int64_t index_of(std::string_view term) const;

  std::string serialize() const;
  static TfidfModel deserialize(std::string_view bytes);
  void save(const std::string& path) const;
  static TfidfModel load(const std::string& path);
  std::uint64_t fingerprint() const;

  bool operator==(const TfidfModel&) const = default;

 private:
  std::uint64_t doc_count_ = 0;
  std::vector<std::string> terms_;
  std::map<std::string, std::uint32_t, std::less<>> vocabulary_;
  std::vector<double> idf_;
};

/// TF-IDF tokenization: the encoder tokenizer without the length cap.
std::vector<std::string> tfidf_tokens(std::string_view text);

struct ScoreWeights {
  double fusion = 1.0 / 3.0;
  double genre = 1.0 / 3.0;
  double tfidf = 1.0 / 3.0;

  /// Throws InvalidWeights unless all are >= 0 and they sum to 1 (within 1e-9).
  void validate() const;
  /// Parses "w1,w2,w3".
  static ScoreWeights parse(std::string_view text);
  bool operator==(const ScoreWeights&) const = default;
};

struct ScoreBreakdown {
  double fusion_sim = 0.0;
  double genre_sim = 0.0;
  double tfidf_sim = 0.0;
  double combined = 0.0;

  bool operator==(const ScoreBreakdown&) const = default;
};

/// combined = w1 * fusion_sim + w2 * genre_sim + w3 * tfidf_sim
ScoreBreakdown combined_score(double fusion_sim, double genre_sim, double tfidf_sim,
                              const ScoreWeights& weights);

}  // namespace fusionrec
