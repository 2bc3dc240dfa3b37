#include "taskprog/f32t.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "taskprog/digest.hpp"
#include "taskprog/errors.hpp"

namespace taskprog::f32t {
namespace {

static_assert(std::endian::native == std::endian::little, "F32T I/O assumes a little-endian host");

void append(std::vector<std::byte>& out, const void* src, std::size_t n) {
  const auto* p = static_cast<const std::byte*>(src);
  out.insert(out.end(), p, p + n);
}

}  // namespace

std::vector<std::byte> encode(const Tensor& t) {
  if (t.rank() > 255) throw InvalidArgument("F32T: rank exceeds 255");
  std::vector<std::byte> out;
  out.reserve(5 + 4 * t.rank() + 4 * t.size());
  append(out, kMagic, 4);
  const auto rank = static_cast<std::uint8_t>(t.rank());
  append(out, &rank, 1);
  for (std::size_t d : t.shape()) {
    if (d > UINT32_MAX) throw InvalidArgument("F32T: dimension exceeds u32");
    const auto dim = static_cast<std::uint32_t>(d);
    append(out, &dim, 4);
  }
  append(out, t.data(), 4 * t.size());
  return out;
}

Tensor decode(std::span<const std::byte> bytes) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw InvalidArgument("F32T: bad magic");
  }
  const auto rank = static_cast<std::size_t>(bytes[4]);
  if (bytes.size() < 5 + 4 * rank) throw InvalidArgument("F32T: truncated header");
  Shape shape(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    std::uint32_t dim = 0;
    std::memcpy(&dim, bytes.data() + 5 + 4 * i, 4);
    shape[i] = dim;
  }
  const std::size_t offset = 5 + 4 * rank;
  const std::size_t count = shape_size(shape);
  if (bytes.size() != offset + 4 * count) {
    throw InvalidArgument("F32T: payload of " + std::to_string(bytes.size() - offset) + " bytes does not match shape " +
                          shape_string(shape));
  }
  std::vector<float> values(count);
  std::memcpy(values.data(), bytes.data() + offset, 4 * count);
  return Tensor(std::move(shape), std::move(values));
}

std::vector<std::byte> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw IoError("short read from " + path.string());
  return bytes;
}

std::uint64_t write(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
  return crc64(bytes);
}

Tensor read(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode(bytes);
  } catch (const InvalidArgument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Tensor read(const std::filesystem::path& path, std::uint64_t expected_crc) {
  const auto bytes = read_bytes(path);
  const std::uint64_t actual = crc64(bytes);
  if (actual != expected_crc) {
    throw DigestMismatch("digest mismatch for " + path.string() + ": expected " + hex_digest(expected_crc) +
                         ", found " + hex_digest(actual));
  }
  return decode(bytes);
}

}  // namespace taskprog::f32t
