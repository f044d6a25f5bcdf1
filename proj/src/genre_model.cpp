#include "fusionrec/genre_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fusionrec/binary_io.hpp"
#include "fusionrec/errors.hpp"
#include "fusionrec/rng.hpp"
#include "fusionrec/text.hpp"

namespace fusionrec {

namespace {

constexpr std::string_view kMagic{"LFRGEN1\0", 8};

float sigmoid(float x) {
  if (x > 8.0f) return 1.0f;
  if (x < -8.0f) return 0.0f;
  return 1.0f / (1.0f + std::exp(-x));
}

}  // namespace

std::vector<std::string> char_ngrams(std::string_view token, std::uint32_t min_n,
                                     std::uint32_t max_n) {
  std::u32string wrapped;
  wrapped.push_back(U'<');
  for (char32_t cp : text::decode_utf8(token)) wrapped.push_back(cp);
  wrapped.push_back(U'>');
  std::vector<std::string> out;
  for (std::size_t i = 0; i < wrapped.size(); ++i) {
    for (std::size_t n = 1; n <= max_n && i + n <= wrapped.size(); ++n) {
      if (n < min_n) continue;
      if (n == 1 && (i == 0 || i + 1 == wrapped.size())) continue;
      out.push_back(text::encode_utf8(std::u32string_view(wrapped).substr(i, n)));
    }
  }
  return out;
}

GenreEmbeddingModel::GenreEmbeddingModel(std::uint32_t dim, std::uint32_t min_n,
                                         std::uint32_t max_n, std::uint64_t buckets,
                                         std::uint64_t seed)
    : dim_(dim), min_n_(min_n), max_n_(max_n), buckets_(buckets), seed_(seed) {
  if (dim == 0 || buckets == 0 || min_n == 0 || min_n > max_n)
    throw InvalidConfig("genre model needs dim > 0, buckets > 0 and 0 < min_n <= max_n");
  bucket_vectors_.assign(buckets_ * dim_, 0.0f);
}

bool GenreEmbeddingModel::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::span<const float> GenreEmbeddingModel::token_vector(std::size_t index) const {
  return {token_vectors_.data() + index * dim_, dim_};
}
std::span<float> GenreEmbeddingModel::token_vector(std::size_t index) {
  return {token_vectors_.data() + index * dim_, dim_};
}
std::span<const float> GenreEmbeddingModel::bucket_vector(std::uint64_t bucket) const {
  return {bucket_vectors_.data() + bucket * dim_, dim_};
}
std::span<float> GenreEmbeddingModel::bucket_vector(std::uint64_t bucket) {
  return {bucket_vectors_.data() + bucket * dim_, dim_};
}

std::uint64_t GenreEmbeddingModel::bucket_of(std::string_view ngram) const {
  return fnv1a32(ngram) % buckets_;
}

std::vector<std::uint64_t> GenreEmbeddingModel::subword_buckets(std::string_view token) const {
  std::vector<std::uint64_t> ids;
  for (const auto& g : char_ngrams(token, min_n_, max_n_)) ids.push_back(bucket_of(g));
  return ids;
}

std::size_t GenreEmbeddingModel::add_token(std::string token) {
  auto [it, inserted] = index_.emplace(token, vocab_.size());
  if (inserted) {
    vocab_.push_back(std::move(token));
    token_vectors_.resize(vocab_.size() * dim_, 0.0f);
  }
  return it->second;
}

std::vector<float> GenreEmbeddingModel::embed(std::string_view token) const {
  std::vector<double> acc(dim_, 0.0);
  std::size_t parts = 0;
  auto add = [&](std::span<const float> v) {
    for (std::uint32_t k = 0; k < dim_; ++k) acc[k] += v[k];
    ++parts;
  };
  if (auto it = index_.find(std::string(token)); it != index_.end())
    add(token_vector(it->second));
  for (auto b : subword_buckets(token)) add(bucket_vector(b));
  std::vector<float> out(dim_, 0.0f);
  if (parts == 0) return out;
  for (std::uint32_t k = 0; k < dim_; ++k) out[k] = static_cast<float>(acc[k] / parts);
  return out;
}

std::vector<float> GenreEmbeddingModel::embed_set(std::span<const std::string> genres) const {
  if (genres.empty()) throw EmptyGenreList("genre list is empty");
  std::vector<double> acc(dim_, 0.0);
  for (const auto& g : genres) {
    auto v = embed(g);
    for (std::uint32_t k = 0; k < dim_; ++k) acc[k] += v[k];
  }
  std::vector<float> out(dim_);
  for (std::uint32_t k = 0; k < dim_; ++k)
    out[k] = static_cast<float>(acc[k] / static_cast<double>(genres.size()));
  return out;
}

std::string GenreEmbeddingModel::serialize() const {
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint32_t>(dim_);
  w.put<std::uint32_t>(min_n_);
  w.put<std::uint32_t>(max_n_);
  w.put<std::uint64_t>(buckets_);
  w.put<std::uint64_t>(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    w.put_short_string(vocab_[i]);
    w.put_array(token_vector(i));
  }
  w.put_array(std::span<const float>(bucket_vectors_));
  w.put<std::uint64_t>(seed_);
  return w.take();
}

GenreEmbeddingModel GenreEmbeddingModel::deserialize(std::string_view bytes) {
  ByteReader r(bytes, "genre model");
  r.expect_magic(kMagic);
  const auto dim = r.get<std::uint32_t>();
  const auto min_n = r.get<std::uint32_t>();
  const auto max_n = r.get<std::uint32_t>();
  const auto buckets = r.get<std::uint64_t>();
  const auto vocab_size = r.get<std::uint64_t>();
  if (dim == 0 || buckets == 0 || min_n == 0 || min_n > max_n) r.fail("invalid header");
  // Each vocab entry needs at least 2 + 4*dim bytes; reject absurd counts early.
  if (vocab_size > r.remaining() / (2 + 4ULL * dim)) r.fail("truncated vocabulary");
  if (buckets > r.remaining() / (4ULL * dim)) r.fail("truncated bucket table");
  GenreEmbeddingModel model(dim, min_n, max_n, buckets, 0);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    auto token = r.get_short_string();
    auto idx = model.add_token(token);
    if (idx != i) r.fail("duplicate vocabulary token '" + token + "'");
    r.get_array(model.token_vector(idx));
  }
  r.get_array(std::span<float>(model.bucket_vectors_));
  model.seed_ = r.get<std::uint64_t>();
  r.expect_end();
  return model;
}

void GenreEmbeddingModel::save(const std::string& path) const { write_file(path, serialize()); }

GenreEmbeddingModel GenreEmbeddingModel::load(const std::string& path) {
  return deserialize(read_file(path));
}

bool GenreEmbeddingModel::operator==(const GenreEmbeddingModel& o) const {
  return dim_ == o.dim_ && min_n_ == o.min_n_ && max_n_ == o.max_n_ && buckets_ == o.buckets_ &&
         seed_ == o.seed_ && vocab_ == o.vocab_ && token_vectors_ == o.token_vectors_ &&
         bucket_vectors_ == o.bucket_vectors_;
}

GenreEmbeddingModel train_genre_model(const std::vector<std::vector<std::string>>& sequences,
                                      const GenreTrainConfig& config) {
  if (config.epochs == 0 || config.window == 0 || !(config.lr > 0.0))
    throw InvalidConfig("genre training needs epochs >= 1, window >= 1 and lr > 0");
  const bool has_pair = std::any_of(sequences.begin(), sequences.end(),
                                    [](const auto& s) { return s.size() >= 2; });
  if (!has_pair) throw EmptyCorpus("genre corpus has no sequence with two or more tokens");

  std::map<std::string, std::uint64_t> counts;
  for (const auto& seq : sequences)
    for (const auto& tok : seq) ++counts[tok];
  if (counts.size() < 2) throw DegenerateCorpus("genre vocabulary has fewer than two tokens");

  // Frequency descending, ties lexicographic.
  std::vector<std::pair<std::string, std::uint64_t>> ordered(counts.begin(), counts.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  const std::uint32_t dim = config.dim;
  GenreEmbeddingModel model(dim, config.min_n, config.max_n, config.buckets, config.seed);
  for (const auto& [tok, _] : ordered) model.add_token(tok);
  const std::size_t vocab = ordered.size();

  Rng rng(config.seed);
  const float bound = 1.0f / static_cast<float>(dim);
  for (auto& x : model.token_vectors_) x = static_cast<float>(rng.uniform(-bound, bound));
  for (auto& x : model.bucket_vectors_) x = static_cast<float>(rng.uniform(-bound, bound));
  std::vector<float> output(vocab * dim, 0.0f);

  // Negative sampling distribution: unigram^0.75.
  std::vector<double> cumulative(vocab);
  double total = 0.0;
  for (std::size_t i = 0; i < vocab; ++i) {
    total += std::pow(static_cast<double>(ordered[i].second), 0.75);
    cumulative[i] = total;
  }
  auto draw_negative = [&](std::size_t exclude) {
    for (;;) {
      const double u = rng.uniform() * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
          it - cumulative.begin(), static_cast<std::ptrdiff_t>(vocab - 1)));
      if (idx != exclude) return idx;
    }
  };

  // Per-token input components: own vector index plus n-gram buckets.
  std::vector<std::vector<std::uint64_t>> components(vocab);
  for (std::size_t i = 0; i < vocab; ++i) components[i] = model.subword_buckets(model.vocab_[i]);

  std::vector<std::vector<std::size_t>> corpus;
  std::uint64_t total_tokens = 0;
  for (const auto& seq : sequences) {
    std::vector<std::size_t> ids;
    for (const auto& tok : seq) ids.push_back(model.index_.at(tok));
    total_tokens += ids.size();
    corpus.push_back(std::move(ids));
  }
  const double total_steps = static_cast<double>(total_tokens) * config.epochs;

  std::vector<float> hidden(dim);
  std::vector<float> grad(dim);
  std::uint64_t processed = 0;

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& seq : corpus) {
      for (std::size_t pos = 0; pos < seq.size(); ++pos, ++processed) {
        const float lr = static_cast<float>(config.lr * (1.0 - processed / total_steps));
        const std::size_t word = seq[pos];
        const auto& subs = components[word];
        const float inv_parts = 1.0f / static_cast<float>(subs.size() + 1);
        const auto boundary = 1 + static_cast<std::size_t>(rng.below(config.window));
        for (std::size_t c = (pos >= boundary ? pos - boundary : 0);
             c <= pos + boundary && c < seq.size(); ++c) {
          if (c == pos) continue;
          // Hidden state is recomputed per context since the inputs move.
          std::copy_n(model.token_vector(word).begin(), dim, hidden.begin());
          for (auto b : subs) {
            auto v = model.bucket_vector(b);
            for (std::uint32_t k = 0; k < dim; ++k) hidden[k] += v[k];
          }
          for (auto& h : hidden) h *= inv_parts;
          std::fill(grad.begin(), grad.end(), 0.0f);

          auto train_output = [&](std::size_t target, float label) {
            float* out = output.data() + target * dim;
            float dot = 0.0f;
            for (std::uint32_t k = 0; k < dim; ++k) dot += hidden[k] * out[k];
            const float g = lr * (label - sigmoid(dot));
            for (std::uint32_t k = 0; k < dim; ++k) {
              grad[k] += g * out[k];
              out[k] += g * hidden[k];
            }
          };
          train_output(seq[c], 1.0f);
          for (std::uint32_t n = 0; n < config.negatives; ++n)
            train_output(draw_negative(seq[c]), 0.0f);

          auto own = model.token_vector(word);
          for (std::uint32_t k = 0; k < dim; ++k) own[k] += grad[k];
          for (auto b : subs) {
            auto v = model.bucket_vector(b);
            for (std::uint32_t k = 0; k < dim; ++k) v[k] += grad[k];
          }
        }
      }
    }
  }
  return model;
}

}  // namespace fusionrec
