#include "fusionrec/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "fusionrec/binary_io.hpp"
#include "fusionrec/errors.hpp"
#include "fusionrec/text.hpp"

namespace fusionrec {

namespace {

constexpr std::string_view kMagic{"LFRTFI1\0", 8};
constexpr double kTiny = 1e-12;

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size())
    throw ShapeMismatch("cosine operands have lengths " + std::to_string(a.size()) + " and " +
                        std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kTiny || nb < kTiny) return 0.0;
  return dot / (na * nb);
}

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

double sparse_dot(const SparseVector& a, const SparseVector& b) {
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] < b.indices[j]) {
      ++i;
    } else if (a.indices[i] > b.indices[j]) {
      ++j;
    } else {
      dot += a.weights[i++] * b.weights[j++];
    }
  }
  return dot;
}

double sparse_cosine(const SparseVector& a, const SparseVector& b) {
  double na = 0.0, nb = 0.0;
  for (double w : a.weights) na += w * w;
  for (double w : b.weights) nb += w * w;
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kTiny || nb < kTiny) return 0.0;
  return sparse_dot(a, b) / (na * nb);
}

std::vector<std::string> tfidf_tokens(std::string_view text) {
  return text::tokenize(text, std::numeric_limits<std::size_t>::max());
}

TfidfModel TfidfModel::fit(std::span<const std::string> corpus) {
  if (corpus.empty()) throw EmptyCorpus("TF-IDF corpus is empty");
  std::map<std::string, std::uint64_t, std::less<>> df;
  for (const auto& doc : corpus) {
    auto toks = tfidf_tokens(doc);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (auto& t : toks) ++df[std::move(t)];
  }
  TfidfModel m;
  m.doc_count_ = corpus.size();
  const double n = static_cast<double>(corpus.size());
  for (const auto& [term, count] : df) {
    m.vocabulary_.emplace(term, static_cast<std::uint32_t>(m.terms_.size()));
    m.terms_.push_back(term);
    m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return m;
}

std::int64_t TfidfModel::index_of(std::string_view term) const {
  auto it = vocabulary_.find(term);
  return it == vocabulary_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

SparseVector TfidfModel::transform(std::string_view text) const {
  std::map<std::uint32_t, double> tf;
  for (const auto& tok : tfidf_tokens(text)) {
    auto it = vocabulary_.find(tok);
    if (it != vocabulary_.end()) tf[it->second] += 1.0;
  }
  SparseVector out;
  double norm2 = 0.0;
  for (const auto& [idx, count] : tf) {
    const double w = count * idf_[idx];
    out.indices.push_back(idx);
    out.weights.push_back(w);
    norm2 += w * w;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& w : out.weights) w *= inv;
  }
  return out;
}

std::string TfidfModel::serialize() const {
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint64_t>(doc_count_);
  w.put<std::uint64_t>(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    w.put_short_string(terms_[i]);
    w.put<double>(idf_[i]);
  }
  return w.take();
}

TfidfModel TfidfModel::deserialize(std::string_view bytes) {
  ByteReader r(bytes, "tfidf model");
  r.expect_magic(kMagic);
  TfidfModel m;
  m.doc_count_ = r.get<std::uint64_t>();
  const auto vocab = r.get<std::uint64_t>();
  if (vocab > r.remaining() / 10) r.fail("truncated vocabulary");
  for (std::uint64_t i = 0; i < vocab; ++i) {
    auto term = r.get_short_string();
    const double idf = r.get<double>();
    if (!m.terms_.empty() && !(m.terms_.back() < term)) r.fail("terms not strictly sorted");
    if (!(idf > 0.0) || !std::isfinite(idf)) r.fail("invalid idf");
    m.vocabulary_.emplace(term, static_cast<std::uint32_t>(i));
    m.terms_.push_back(std::move(term));
    m.idf_.push_back(idf);
  }
  r.expect_end();
  return m;
}

void TfidfModel::save(const std::string& path) const { write_file(path, serialize()); }

TfidfModel TfidfModel::load(const std::string& path) { return deserialize(read_file(path)); }

std::uint64_t TfidfModel::fingerprint() const { return fnv1a64(serialize()); }

void ScoreWeights::validate() const {
  const bool finite = std::isfinite(fusion) && std::isfinite(genre) && std::isfinite(tfidf);
  if (!finite || fusion < 0.0 || genre < 0.0 || tfidf < 0.0)
    throw InvalidWeights("score weights must be finite and non-negative");
  if (std::abs(fusion + genre + tfidf - 1.0) > 1e-9)
    throw InvalidWeights("score weights must sum to 1");
}

ScoreWeights ScoreWeights::parse(std::string_view text) {
  double vals[3];
  for (int k = 0; k < 3; ++k) {
    auto comma = text.find(',');
    if ((k < 2) != (comma != std::string_view::npos))
      throw InvalidWeights("weights must be three comma-separated numbers");
    auto part = text::trim(text.substr(0, comma));
    const auto* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, vals[k]);
    if (ec != std::errc() || ptr != end || part.empty())
      throw InvalidWeights("cannot parse weight '" + std::string(part) + "'");
    if (comma != std::string_view::npos) text.remove_prefix(comma + 1);
  }
  ScoreWeights w{vals[0], vals[1], vals[2]};
  w.validate();
  return w;
}

ScoreBreakdown combined_score(double fusion_sim, double genre_sim, double tfidf_sim,
                              const ScoreWeights& weights) {
  weights.validate();
  return {fusion_sim, genre_sim, tfidf_sim,
          weights.fusion * fusion_sim + weights.genre * genre_sim + weights.tfidf * tfidf_sim};
}

}  // namespace fusionrec
