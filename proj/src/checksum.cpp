#include "meshflow/checksum.hpp"

namespace meshflow {

std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::byte b : bytes) {
    h ^= std::uint64_t(std::uint8_t(b));
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t dat_checksum(const DatInfo& dat) {
  // Storage is little-endian in memory on every supported target.
  std::size_t row = dat.elem_bytes();
  std::span<const std::byte> bytes(dat.storage);
  std::uint64_t sum = 0;
  for (std::size_t off = 0; off + row <= bytes.size(); off += row)
    sum += fnv1a(bytes.subspan(off, row));
  return sum;
}

std::uint64_t combined_checksum(const MeshStore& mesh,
                                std::span<const DatId> dats) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (DatId id : dats) {
    std::uint64_t c = dat_checksum(mesh.dat(id));
    h = fnv1a({reinterpret_cast<const std::byte*>(&c), sizeof(c)}, h);
  }
  return h;
}

}  // namespace meshflow
