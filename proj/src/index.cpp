#include "fusionrec/index.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "fusionrec/binary_io.hpp"
#include "fusionrec/features.hpp"

namespace fusionrec {

namespace {

constexpr std::string_view kMagic{"LFRIDX1\0", 8};
constexpr std::uint8_t kVersion = 1;

SparseVector to_f32_precision(SparseVector v) {
  for (auto& w : v.weights) w = static_cast<double>(static_cast<float>(w));
  return v;
}

}  // namespace

FeatureIndex build_index(const std::vector<Item>& target, const EncoderProvider& encoder,
                         const GenreEmbeddingModel& genre_model, const FusionCheckpoint& checkpoint,
                         const TfidfModel& tfidf, const IndexBuildConfig& config) {
  if (config.batch_size < 1) throw InvalidConfig("index batch_size must be >= 1");
  if (config.parallelism < 1) throw InvalidConfig("index parallelism must be >= 1");
  const auto& params = checkpoint.params;
  if (params.text_dim() != encoder.dim() || params.genre_dim() != genre_model.dim())
    throw ShapeMismatch("encoder/genre model dimensions do not match the fusion checkpoint");

  const std::size_t n = target.size();
  FeatureIndex index;
  index.provider_id = encoder.provider_id();
  index.model_fingerprint = fingerprint(checkpoint);
  index.tfidf_fingerprint = tfidf.fingerprint();
  index.fused.resize(static_cast<Eigen::Index>(n), params.text_dim());
  index.genre.resize(static_cast<Eigen::Index>(n), params.genre_dim());
  index.tfidf_rows.resize(n);
  for (const auto& item : target) index.item_ids.push_back(item.id);

  const std::size_t chunks = (n + config.batch_size - 1) / config.batch_size;
  std::vector<std::vector<std::string>> missing(chunks);

  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * config.batch_size;
    const std::size_t end = std::min(n, begin + config.batch_size);
    std::vector<Item> slice(target.begin() + static_cast<std::ptrdiff_t>(begin),
                            target.begin() + static_cast<std::ptrdiff_t>(end));
    FeatureTable feats;
    try {
      feats = compute_features(slice, encoder, genre_model);
    } catch (const MissingEmbedding& e) {
      missing[c] = e.ids();
      return;
    }
    for (std::size_t k = 0; k < slice.size(); ++k) {
      const auto row = static_cast<Eigen::Index>(begin + k);
      const auto col = static_cast<Eigen::Index>(k);
      // Per-item products keep each row independent of how items are batched,
      // and identical to the seed-side features computed at query time.
      const Vec<float> e = feats.text.col(col);
      const Vec<float> g = feats.genre.col(col);
      index.fused.row(row) = forward<float>(params, e, g).transpose();
      index.genre.row(row) = feats.genre.col(col).transpose();
      index.tfidf_rows[begin + k] = to_f32_precision(tfidf.transform(slice[k].description));
    }
  };

  const std::size_t workers = std::min<std::size_t>(config.parallelism, std::max<std::size_t>(chunks, 1));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c; (c = next.fetch_add(1)) < chunks;) {
          try {
            run_chunk(c);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<std::string> all_missing;
  for (auto& m : missing) all_missing.insert(all_missing.end(), m.begin(), m.end());
  if (!all_missing.empty()) throw MissingEmbedding(std::move(all_missing));
  return index;
}

std::string serialize_index(const FeatureIndex& index) {
  const auto n = index.size();
  if (static_cast<std::size_t>(index.fused.rows()) != n ||
      static_cast<std::size_t>(index.genre.rows()) != n || index.tfidf_rows.size() != n)
    throw ShapeMismatch("index tables disagree on row count");
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint8_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(index.fused.cols()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(index.genre.cols()));
  w.put<std::uint64_t>(n);
  w.put<std::uint64_t>(index.model_fingerprint);
  w.put<std::uint64_t>(index.tfidf_fingerprint);
  w.put_short_string(index.provider_id);
  for (const auto& id : index.item_ids) w.put_short_string(id);
  w.put_array(std::span<const float>(index.fused.data(), static_cast<std::size_t>(index.fused.size())));
  w.put_array(std::span<const float>(index.genre.data(), static_cast<std::size_t>(index.genre.size())));
  for (const auto& row : index.tfidf_rows) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(row.nnz()));
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      w.put<std::uint32_t>(row.indices[k]);
      w.put<float>(static_cast<float>(row.weights[k]));
    }
  }
  return w.take();
}

FeatureIndex deserialize_index(std::string_view bytes) {
  try {
    ByteReader r(bytes, "index");
    r.expect_magic(kMagic);
    const auto version = r.get<std::uint8_t>();
    if (version != kVersion)
      throw CorruptIndex("index: unsupported version " + std::to_string(version) + " (expected 1)");
    const auto text_dim = r.get<std::uint32_t>();
    const auto genre_dim = r.get<std::uint32_t>();
    const auto n = r.get<std::uint64_t>();
    FeatureIndex index;
    index.model_fingerprint = r.get<std::uint64_t>();
    index.tfidf_fingerprint = r.get<std::uint64_t>();
    index.provider_id = r.get_short_string();
    if (text_dim == 0 || genre_dim == 0) r.fail("zero dimension");
    if (n > r.remaining() / (2 + 4ULL * (text_dim + genre_dim) + 4)) r.fail("truncated rows");
    index.item_ids.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) index.item_ids.push_back(r.get_short_string());
    std::vector<std::string> sorted = index.item_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) r.fail("duplicate item id");
    index.fused.resize(static_cast<Eigen::Index>(n), text_dim);
    index.genre.resize(static_cast<Eigen::Index>(n), genre_dim);
    r.get_array(std::span<float>(index.fused.data(), static_cast<std::size_t>(index.fused.size())));
    r.get_array(std::span<float>(index.genre.data(), static_cast<std::size_t>(index.genre.size())));
    index.tfidf_rows.resize(n);
    for (auto& row : index.tfidf_rows) {
      const auto nnz = r.get<std::uint32_t>();
      if (nnz > r.remaining() / 8) r.fail("truncated sparse row");
      row.indices.reserve(nnz);
      row.weights.reserve(nnz);
      for (std::uint32_t k = 0; k < nnz; ++k) {
        const auto idx = r.get<std::uint32_t>();
        if (!row.indices.empty() && idx <= row.indices.back()) r.fail("sparse indices not increasing");
        row.indices.push_back(idx);
        row.weights.push_back(r.get<float>());
      }
    }
    r.expect_end();
    return index;
  } catch (const CorruptIndex&) {
    throw;
  } catch (const CorruptFile& e) {
    throw CorruptIndex(e.what());
  }
}

void save_index(const FeatureIndex& index, const std::string& path) {
  write_file(path, serialize_index(index));
}

FeatureIndex load_index(const std::string& path) { return deserialize_index(read_file(path)); }

std::size_t expected_index_size(const FeatureIndex& index) {
  std::size_t bytes = kMagic.size() + 1 + 4 + 4 + 8 + 8 + 8 + 2 + index.provider_id.size();
  for (const auto& id : index.item_ids) bytes += 2 + id.size();
  bytes += index.size() * static_cast<std::size_t>(index.fused.cols() + index.genre.cols()) * 4;
  for (const auto& row : index.tfidf_rows) bytes += 4 + row.nnz() * 8;
  return bytes;
}

bool verify_compatibility(const FeatureIndex& index, const FusionCheckpoint& checkpoint,
                          const TfidfModel& tfidf) {
  return index.model_fingerprint == fingerprint(checkpoint) &&
         index.tfidf_fingerprint == tfidf.fingerprint();
}

}  // namespace fusionrec
