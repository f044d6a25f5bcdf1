#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "fusionrec/errors.hpp"

namespace fusionrec {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written as native little-endian");

/// 64-bit FNV-1a over raw bytes.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t hash = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

/// 32-bit FNV-1a, used for n-gram bucketing.
constexpr std::uint32_t fnv1a32(std::string_view bytes) noexcept {
  std::uint32_t hash = 2166136261u;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 16777619u;
  }
  return hash;
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);
bool file_exists(const std::string& path);

// Appends little-endian scalars to an in-memory buffer.
class ByteWriter {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buf_.append(raw, sizeof(T));
  }

  void put_bytes(std::string_view bytes) { buf_.append(bytes); }

  // u16 length prefix + UTF-8 payload.
  void put_short_string(std::string_view s);

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put_array(std::span<const T> values) {
    buf_.append(reinterpret_cast<const char*>(values.data()), values.size_bytes());
  }

  const std::string& bytes() const noexcept { return buf_; }
  std::string take() noexcept { return std::move(buf_); }

 private:
  std::string buf_;
};

// Bounds-checked cursor over a byte buffer. Any overrun throws CorruptFile
// naming the byte offset.
class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string label)
      : bytes_(bytes), label_(std::move(label)) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    require(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view get_bytes(std::size_t n) {
    require(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::string get_short_string();

  template <typename T>
    requires std::is_arithmetic_v<T>
  void get_array(std::span<T> out) {
    require(out.size_bytes());
    std::memcpy(out.data(), bytes_.data() + pos_, out.size_bytes());
    pos_ += out.size_bytes();
  }

  void expect_magic(std::string_view magic);
  void expect_end() const;

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  [[noreturn]] void fail(const std::string& what) const;

 private:
  void require(std::size_t n) const;

  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::string label_;
};

}  // namespace fusionrec
