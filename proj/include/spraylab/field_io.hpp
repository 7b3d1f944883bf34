#pragma once

#include <filesystem>

#include "spraylab/grid.hpp"

namespace spray {

// Binary snapshot format, little endian:
//   bytes 0..3   magic "SPRY"
//   u32          format version (currently 1)
//   f64          box half width L
//   u32          cells per axis n
//   u32          component count (1 or 2)
//   f64[...]     samples, planar by component, each plane row major
void write_field(const std::filesystem::path& path, const GridField& f);

// Throws ConfigError on wrong magic, bad header values, truncated payload,
// or non-finite samples.
GridField read_field(const std::filesystem::path& path);

} // namespace spray
