#include "fusionrec/encoder.hpp"

#include <cmath>
#include <cstdio>

#include "fusionrec/binary_io.hpp"
#include "fusionrec/errors.hpp"
#include "fusionrec/text.hpp"

namespace fusionrec {

namespace {

constexpr std::string_view kMagic{"LFREMB1\0", 8};

void add_hashed(std::vector<double>& acc, std::string_view feature) {
  const std::uint64_t h = fnv1a64(feature);
  const std::size_t bucket = h % acc.size();
  acc[bucket] += ((h >> 32) & 1U) ? -1.0 : 1.0;
}

}  // namespace

TextEmbedding encode_text(const EncoderProvider& provider, const Item& item) {
  if (text::trim(item.description).empty())
    throw EmptyInput("item '" + item.id + "' has an empty description");
  return {provider.encode(item), provider.provider_id()};
}

std::vector<float> fallback_encode(std::string_view description, std::uint32_t dim) {
  const auto tokens = text::tokenize(description, text::kMaxTokens);
  std::vector<double> acc(dim, 0.0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add_hashed(acc, tokens[i]);
    if (i + 1 < tokens.size()) add_hashed(acc, tokens[i] + ' ' + tokens[i + 1]);
  }
  double norm2 = 0.0;
  for (double x : acc) norm2 += x * x;
  std::vector<float> out(dim, 0.0f);
  if (norm2 == 0.0) {
    out[0] = 1.0f;
    return out;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::uint32_t k = 0; k < dim; ++k) out[k] = static_cast<float>(acc[k] * inv);
  return out;
}

void EmbeddingTable::append(std::string id, std::span<const float> vec) {
  if (vec.size() != dim)
    throw ShapeMismatch("embedding for '" + id + "' has length " + std::to_string(vec.size()) +
                        ", expected " + std::to_string(dim));
  ids.push_back(std::move(id));
  values.insert(values.end(), vec.begin(), vec.end());
}

std::string serialize_embeddings(const EmbeddingTable& table) {
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint32_t>(table.dim);
  w.put<std::uint64_t>(table.ids.size());
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    w.put_short_string(table.ids[i]);
    w.put_array(table.row(i));
  }
  return w.take();
}

EmbeddingTable deserialize_embeddings(std::string_view bytes) {
  ByteReader r(bytes, "embedding file");
  r.expect_magic(kMagic);
  EmbeddingTable table;
  table.dim = r.get<std::uint32_t>();
  if (table.dim == 0) r.fail("zero dimension");
  const auto count = r.get<std::uint64_t>();
  if (count > r.remaining() / (2 + 4ULL * table.dim)) r.fail("truncated records");
  table.ids.reserve(count);
  table.values.resize(count * table.dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    table.ids.push_back(r.get_short_string());
    r.get_array(std::span<float>(table.values.data() + i * table.dim, table.dim));
  }
  r.expect_end();
  for (float x : table.values)
    if (!std::isfinite(x)) throw CorruptFile("embedding file: non-finite value");
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
  write_file(path, serialize_embeddings(table));
}

EmbeddingTable load_embeddings(const std::string& path) {
  return deserialize_embeddings(read_file(path));
}

FileEmbeddingProvider::FileEmbeddingProvider(EmbeddingTable table) : table_(std::move(table)) {
  for (std::size_t i = 0; i < table_.ids.size(); ++i) {
    if (!pos_.emplace(table_.ids[i], i).second)
      throw CorruptFile("embedding file: duplicate id '" + table_.ids[i] + "'");
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_embeddings(table_))));
  id_ = std::string("file:") + hex;
}

FileEmbeddingProvider FileEmbeddingProvider::from_file(const std::string& path) {
  return FileEmbeddingProvider(load_embeddings(path));
}

std::vector<float> FileEmbeddingProvider::encode(const Item& item) const {
  auto it = pos_.find(item.id);
  if (it == pos_.end()) throw MissingEmbedding({item.id});
  auto row = table_.row(it->second);
  return {row.begin(), row.end()};
}

}  // namespace fusionrec
