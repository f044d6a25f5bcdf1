#include "fusionrec/fusion.hpp"

#include <span>

#include "fusionrec/binary_io.hpp"

namespace fusionrec {

namespace {
constexpr std::string_view kMagic{"LFRMDL1\0", 8};
}

std::string serialize_checkpoint(const FusionCheckpoint& ckpt) {
  const auto& p = ckpt.params;
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.genre_dim()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.text_dim()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(2 * p.text_dim()));
  p.for_each_block([&w](const float* data, Eigen::Index n) {
    w.put_array(std::span<const float>(data, static_cast<std::size_t>(n)));
  });
  w.put<std::uint64_t>(ckpt.seed);
  w.put<std::uint32_t>(ckpt.epochs);
  return w.take();
}

FusionCheckpoint deserialize_checkpoint(std::string_view bytes) {
  ByteReader r(bytes, "fusion checkpoint");
  r.expect_magic(kMagic);
  const auto genre_dim = r.get<std::uint32_t>();
  const auto text_dim = r.get<std::uint32_t>();
  const auto concat_dim = r.get<std::uint32_t>();
  if (genre_dim == 0 || text_dim == 0 || concat_dim != 2ULL * text_dim)
    r.fail("inconsistent dimensions");
  const std::uint64_t floats =
      static_cast<std::uint64_t>(text_dim) * (genre_dim + 1 + concat_dim + 1);
  if (r.remaining() != floats * 4 + 12) r.fail("unexpected payload size");
  FusionCheckpoint ckpt;
  ckpt.params = FusionParameters::zeros(text_dim, genre_dim);
  ckpt.params.for_each_block([&r](float* data, Eigen::Index n) {
    r.get_array(std::span<float>(data, static_cast<std::size_t>(n)));
  });
  ckpt.seed = r.get<std::uint64_t>();
  ckpt.epochs = r.get<std::uint32_t>();
  r.expect_end();
  if (!all_finite(ckpt.params)) throw CorruptFile("fusion checkpoint: non-finite parameter");
  return ckpt;
}

void save_checkpoint(const FusionCheckpoint& ckpt, const std::string& path) {
  write_file(path, serialize_checkpoint(ckpt));
}

FusionCheckpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file(path));
}

std::uint64_t fingerprint(const FusionCheckpoint& ckpt) {
  return fnv1a64(serialize_checkpoint(ckpt));
}

}  // namespace fusionrec
