#include "fusionrec/binary_io.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace fusionrec {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

bool file_exists(const std::string& path) {
  std::error_code ec;
  return std::filesystem::is_regular_file(path, ec);
}

void ByteWriter::put_short_string(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max())
    throw InvalidConfig("string too long for u16 length prefix");
  put<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
  put_bytes(s);
}

std::string ByteReader::get_short_string() {
  auto n = get<std::uint16_t>();
  return std::string(get_bytes(n));
}

void ByteReader::expect_magic(std::string_view magic) {
  if (remaining() < magic.size() || bytes_.substr(pos_, magic.size()) != magic)
    fail("bad magic (expected " + std::string(magic.substr(0, magic.find('\0'))) + ")");
  pos_ += magic.size();
}

void ByteReader::expect_end() const {
  if (pos_ != bytes_.size())
    fail(std::to_string(bytes_.size() - pos_) + " trailing bytes");
}

void ByteReader::fail(const std::string& what) const {
  throw CorruptFile(label_ + ": " + what + " at offset " + std::to_string(pos_));
}

void ByteReader::require(std::size_t n) const {
  if (bytes_.size() - pos_ < n) fail("truncated");
}

}  // namespace fusionrec
