#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ncell/compartment.hpp"

namespace ncell {

// Draws `count` i.i.d. positions from a lattice-sampled density: a lattice
// cell is chosen by inverse CDF over the cell masses, then the point is placed
// uniformly inside that cell. Output depends only on (field, count, seed).
std::vector<Position> sample_positions(const SpatialDomain& domain, std::span<const double> rho,
                                       std::size_t count, std::uint64_t seed);

// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
// Used instead of std::uniform_real_distribution so sampled values do not
// depend on the standard library implementation.
template <class Engine>
double unit_uniform(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace ncell
