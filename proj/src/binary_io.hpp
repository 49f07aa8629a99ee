#pragma once

// Little-endian byte packing for the checkpoint and feature formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "upm/errors.hpp"

namespace upm::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written by memcpy and assume a little-endian host");

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    bytes_.append(raw, sizeof(T));
  }
  void put_bytes(std::string_view raw) { bytes_.append(raw); }
  void put_string(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes_.append(s);
  }
  /// Appends a u64 length prefix followed by `payload`.
  void put_section(const std::string& payload) {
    put<std::uint64_t>(payload.size());
    bytes_.append(payload);
  }
  const std::string& bytes() const { return bytes_; }
  std::string take() { return std::move(bytes_); }

 private:
  std::string bytes_;
};

/// Reads fail with FormatVersionMismatch on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes, std::string what = "checkpoint")
      : bytes_(bytes), what_(std::move(what)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + at_, sizeof(T));
    at_ += sizeof(T);
    return value;
  }
  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto out = bytes_.substr(at_, n);
    at_ += n;
    return out;
  }
  std::string get_string() { return std::string(get_bytes(get<std::uint32_t>())); }
  std::string_view get_section() { return get_bytes(get<std::uint64_t>()); }
  bool done() const { return at_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - at_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - at_ < n) throw FormatVersionMismatch(what_ + " is truncated");
  }
  std::string_view bytes_;
  std::size_t at_ = 0;
  std::string what_;
};

}  // namespace upm::detail
