#include "taskprog/digest.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <vector>

#include <boost/crc.hpp>

#include "taskprog/errors.hpp"

namespace taskprog {

using Crc64Xz = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL, true, true>;

std::uint64_t crc64(std::span<const std::byte> bytes) {
  Crc64Xz crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::uint64_t crc64(std::string_view text) { return crc64(std::as_bytes(std::span(text.data(), text.size()))); }

std::uint64_t tensor_digest(const Tensor& t) {
  static_assert(std::endian::native == std::endian::little, "digest assumes a little-endian host");
  Crc64Xz crc;
  for (std::size_t d : t.shape()) {
    const auto dim = static_cast<std::uint32_t>(d);
    crc.process_bytes(&dim, sizeof dim);
  }
  crc.process_bytes(t.data(), t.size() * sizeof(float));
  return crc.checksum();
}

std::string hex_digest(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
  return out;
}

std::uint64_t parse_hex_digest(std::string_view text) {
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (ec != std::errc() || end != text.data() + text.size() || text.size() != 16) {
    throw InvalidArgument("malformed digest '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace taskprog
