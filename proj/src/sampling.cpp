#include "ncell/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ncell/error.hpp"

namespace ncell {

std::vector<Position> sample_positions(const SpatialDomain& domain, std::span<const double> rho,
                                       std::size_t count, std::uint64_t seed) {
  const std::size_t lattice = domain.lattice_size();
  if (rho.size() != lattice) {
    throw Error(ErrorCode::ShapeMismatch, "density has " + std::to_string(rho.size()) +
                                              " values, lattice has " + std::to_string(lattice));
  }
  std::vector<double> cdf(lattice);
  double total = 0.0;
  for (std::size_t k = 0; k < lattice; ++k) {
    if (!(rho[k] >= 0.0) || !std::isfinite(rho[k])) {
      throw Error(ErrorCode::InvalidConfig,
                  "density value at lattice point " + std::to_string(k) + " is negative or not finite");
    }
    total += rho[k];
    cdf[k] = total;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroDensity, "density sums to zero over the lattice");

  std::mt19937_64 engine(seed);
  const auto h = domain.cell_extent();
  std::vector<Position> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double target = unit_uniform(engine) * total;
    // cdf[k] > target >= cdf[k-1] implies rho[k] > 0, so empty cells are never picked.
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.end()) --it;
    const auto cell = domain.cell_coords(static_cast<std::size_t>(it - cdf.begin()));
    Position p{0.0, 0.0, 0.0};
    for (int a = 0; a < domain.dimension; ++a) {
      p[a] = domain.lower[a] + (cell[a] + unit_uniform(engine)) * h[a];
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace ncell
