#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>

#include "vidprobe/error.hpp"

namespace vidprobe::binary {

// Little-endian encoder used by the store and probe formats.
class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }

  template <typename T>
  void uint(T v) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
  }

  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

  void str16(std::string_view s) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorCode::InvariantViolation, "string longer than 65535 bytes");
    }
    uint(static_cast<std::uint16_t>(s.size()));
    bytes(s);
  }

  const std::string& data() const& { return out_; }
  std::string take() && { return std::move(out_); }

 private:
  std::string out_;
};

/// Cursor over an in-memory buffer. Running past the end raises `truncated_code`.
class Reader {
 public:
  Reader(std::string_view buf, ErrorCode truncated_code) : buf_(buf), truncated_(truncated_code) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  template <typename T>
  T uint() {
    static_assert(std::is_unsigned_v<T>);
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

  std::string str16() {
    auto n = uint<std::uint16_t>();
    return std::string(bytes(n));
  }

  std::size_t remaining() const { return buf_.size() - pos_; }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) {
      throw Error(truncated_, "unexpected end of data at offset " + std::to_string(pos_));
    }
  }

  std::string_view buf_;
  std::size_t pos_ = 0;
  ErrorCode truncated_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::Io, "read failed: " + path.string());
  return data;
}

/// Writes to `<path>.tmp` and renames over `path`, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename into " + path.string());
  }
}

}  // namespace vidprobe::binary
