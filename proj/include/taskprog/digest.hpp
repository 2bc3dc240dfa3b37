#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "taskprog/tensor.hpp"

namespace taskprog {

/// CRC-64/XZ (ECMA-182 polynomial, reflected, all-ones init and xorout).
std::uint64_t crc64(std::span<const std::byte> bytes);
std::uint64_t crc64(std::string_view text);

/// Digest of a tensor's shape and little-endian float payload.
std::uint64_t tensor_digest(const Tensor& t);

/// 16 lowercase hex digits.
std::string hex_digest(std::uint64_t value);
std::uint64_t parse_hex_digest(std::string_view text);

}  // namespace taskprog
