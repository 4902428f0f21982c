#pragma once

// Little-endian primitives shared by the EMB1 and PHD1 codecs.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "modalign/error.hpp"

namespace modalign::detail {

class ByteWriter {
 public:
  void raw(std::string_view bytes) { buf_.append(bytes); }

  template <typename U>
  void uint(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
    }
  }

  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

  const std::string& bytes() const noexcept { return buf_; }

 private:
  std::string buf_;
};

/// Cursor over an in-memory file. Running past the end throws `on_short`.
class ByteReader {
 public:
  ByteReader(std::string_view data, ErrorCode on_short) : data_(data), on_short_(on_short) {}

  std::string_view raw(std::size_t n) {
    need(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename U>
  U uint() {
    need(sizeof(U));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return static_cast<U>(v);
  }

  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail(on_short_, "unexpected end of file");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
  ErrorCode on_short_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace modalign::detail
