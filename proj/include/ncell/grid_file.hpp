#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ncell {

// Binary grid container shared by field files, binary records and activation
// frames. Layout (little-endian):
//   bytes 0..3   magic "NCG1"
//   bytes 4..7   uint32 number of axes (1..4)
//   then one uint32 extent per axis, then prod(extents) float64 values in
//   row-major order (last axis fastest).
// A 2-axis file therefore has the 16-byte header.
struct Grid {
  std::vector<std::uint32_t> extents;
  std::vector<double> values;

  std::size_t element_count() const;
};

void write_grid(const std::filesystem::path& path, std::span<const std::uint32_t> extents,
                std::span<const double> values);
Grid read_grid(const std::filesystem::path& path);

}  // namespace ncell
