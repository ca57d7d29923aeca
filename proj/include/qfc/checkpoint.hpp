#pragma once

#include <string>

#include "qfc/mean_field.hpp"

namespace qfc {

/// Binary layout: "QFC1", u32 version, u32 active modes N, f64 t, then the
/// fast-time fields a and b on the grid_size_for(N) grid as interleaved
/// little-endian (re, im) f64 pairs.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::string& path, const ModeState& s);
ModeState read_checkpoint(const std::string& path);

}  // namespace qfc
