#pragma once

#include <string>
#include <vector>

#include "ecprune/mask.hpp"
#include "ecprune/network.hpp"
#include "ecprune/scores.hpp"

namespace ecprune {

// Binary container, shared by all checkpoint artifacts. Layout (everything
// little-endian, no padding):
//
//   byte 0..3   magic "ECPR"
//   byte 4..7   u32 format version (currently 1)
//   byte 8      u8 payload kind: 1 network, 2 mask set, 3 score set,
//               4 compensation set
//   byte 9..    payload
//
// Network payload: u64 layer count, then per layer u64 rows, u64 cols,
// u8 activation kind (ActKind order), f64 slope, rows*cols f64 weights
// (row-major), rows f64 biases.
//
// Mask payload: u64 layer count, then per layer u64 rows, u64 cols,
// rows*cols u8 keep flags (row-major).
//
// Score/compensation payload: u64 layer count, then per layer u64 rows,
// u64 cols, rows*cols f64 entries (row-major).
//
// Round-trips are exact: doubles are stored as raw IEEE-754 bit patterns.

void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

void save_mask(const MaskSet& mask, const std::string& path);
MaskSet load_mask(const std::string& path);

void save_scores(const ScoreSet& scores, const std::string& path);
ScoreSet load_scores(const std::string& path);

void save_compensation(const CompensationSet& comp, const std::string& path);
CompensationSet load_compensation(const std::string& path);

} // namespace ecprune
