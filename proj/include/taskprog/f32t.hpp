#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "taskprog/tensor.hpp"

// F32T tensor files: ASCII magic "F32T", a u8 rank, `rank` little-endian u32
// dimensions, then the row-major float32 payload in little-endian order.

namespace taskprog::f32t {

inline constexpr char kMagic[4] = {'F', '3', '2', 'T'};

std::vector<std::byte> encode(const Tensor& t);
Tensor decode(std::span<const std::byte> bytes);

/// Writes the file and returns the CRC-64 of its bytes.
std::uint64_t write(const std::filesystem::path& path, const Tensor& t);

/// Reads a file. When `expected_crc` is given, a mismatch raises DigestMismatch naming the file.
Tensor read(const std::filesystem::path& path);
Tensor read(const std::filesystem::path& path, std::uint64_t expected_crc);

std::vector<std::byte> read_bytes(const std::filesystem::path& path);

}  // namespace taskprog::f32t
