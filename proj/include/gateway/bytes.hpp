#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gateway {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

/// Lowercase hex of at most `limit` leading bytes (all bytes when limit is 0).
std::string to_hex(ByteView bytes, std::size_t limit = 0);
/// Throws Error(InvalidArgument) on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

/// Immutable, cheaply copyable byte buffer. Copies share storage.
class Payload {
 public:
  Payload() : data_(std::make_shared<const Bytes>()) {}
  explicit Payload(Bytes bytes) : data_(std::make_shared<const Bytes>(std::move(bytes))) {}

  ByteView view() const noexcept { return *data_; }
  const Bytes& bytes() const noexcept { return *data_; }
  std::size_t size() const noexcept { return data_->size(); }
  bool empty() const noexcept { return data_->empty(); }
  const std::uint8_t* data() const noexcept { return data_->data(); }

  friend bool operator==(const Payload& a, const Payload& b) { return *a.data_ == *b.data_; }

 private:
  std::shared_ptr<const Bytes> data_;
};

}  // namespace gateway
