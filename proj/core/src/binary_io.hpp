#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "reloc/error.hpp"

namespace reloc::detail {

class LittleEndianWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
  }

 private:
  std::vector<char> buf_;
};

class LittleEndianReader {
 public:
  explicit LittleEndianReader(const std::filesystem::path& path) : name_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + name_);
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  void expect_magic(const char* magic) {
    std::string got(4, '\0');
    take(got.data(), 4);
    if (got != magic) {
      throw Error(ErrorCode::ParseError, name_ + ": bad magic, expected " + magic);
    }
  }
  std::uint8_t u8() {
    std::uint8_t v = 0;
    take(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    take(b, 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  void expect_end() const {
    if (pos_ != buf_.size()) throw Error(ErrorCode::ParseError, name_ + ": trailing bytes");
  }
  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  void take(void* out, std::size_t n) {
    if (pos_ + n > buf_.size()) throw Error(ErrorCode::ParseError, name_ + ": truncated file");
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }

  std::string name_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

}  // namespace reloc::detail
