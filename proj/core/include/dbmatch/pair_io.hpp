#pragma once
// Pair file format ("DBMP", version 1). All integers little-endian.
//
//   offset  field
//   0       magic "DBMP"
//   4       u32 format version (= 1)
//   8       u32 scalar kind: 0 = u32 symbols, 1 = f64 reals
//   12      u64 spec json byte length, followed by the spec json
//   ...     u64 m, u64 n, u64 root seed
//   ...     db1 entries: n*m scalars, row-major
//   ...     db2 entries: n*m scalars, row-major
//   ...     theta1: n x u32
//   ...     theta2: n x u32   (ground truth; trailing so it is separable)
//   ...     u32 crc32 (IEEE) over every preceding byte
//
// Round trips are lossless: floats are stored bit-exact.

#include <cstdint>
#include <string>

#include "dbmatch/database.hpp"

namespace dbmatch {

void save_pair(const CorrelatedPair& pair, const std::string& path);

// Full load, including the ground-truth labeling of the second database.
CorrelatedPair load_pair(const std::string& path);

// Attacker view: same file, but the truth section is only checksummed, never
// surfaced. Returns exactly the matcher's input.
MatchingInstance load_matching_instance(const std::string& path);

// Plain-text export for outside inspection: one entry per row with columns
// db, position, member, v0..v{m-1}.
void export_pair_csv(const CorrelatedPair& pair, const std::string& path);

std::uint32_t crc32_ieee(const void* data, std::size_t size, std::uint32_t seed = 0);

}  // namespace dbmatch
