#pragma once

#include <cstdint>
#include <span>

#include "meshflow/mesh.hpp"

namespace meshflow {

// FNV-1a over a byte range.
std::uint64_t fnv1a(std::span<const std::byte> bytes,
                    std::uint64_t seed = 0xcbf29ce484222325ull);

// Order-independent per-dat checksum: hash each element's row of canonical
// little-endian bytes with FNV-1a, combine rows with wrapping addition.
std::uint64_t dat_checksum(const DatInfo& dat);

// Combine per-dat checksums (declaration order of `dats`) into one value.
std::uint64_t combined_checksum(const MeshStore& mesh,
                                std::span<const DatId> dats);

}  // namespace meshflow
