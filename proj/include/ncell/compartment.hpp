#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ncell {

// Coordinates in model units. Axes beyond the domain dimension are zero.
using Position = std::array<double, 3>;

// Lattice points where the composition normaliser falls below this value
// contribute nothing to the spatial integral.
inline constexpr double kGZeroGuard = 1e-12;

// Non-modulatory classes act excitatory iff their reversal lies above this.
inline constexpr double kExcitatoryPivotMv = -60.0;

inline constexpr double kDensityTolerance = 1e-6;

struct NeurotransmitterClass {
  int id = 0;
  std::string label;
  double synaptic_reversal_mV = -80.0;
  // Modulatory transmitters take their sign from the synapse, not the class.
  bool is_modulatory = false;

  // +1 or -1 for ordinary classes, 0 for modulatory ones.
  int natural_sign() const;
};

// Axis-aligned box with a midpoint quadrature lattice. Lattice points are
// flattened row-major, last axis fastest.
struct SpatialDomain {
  int dimension = 2;
  Position lower{0.0, 0.0, 0.0};
  Position upper{1.0, 1.0, 0.0};
  std::array<int, 3> resolution{2, 2, 1};

  std::size_t lattice_size() const;
  Position cell_extent() const;
  double cell_volume() const;
  Position cell_center(std::size_t flat) const;
  bool contains(const Position& p) const;
  // Lattice cell holding p; points on the upper face map to the last cell.
  std::size_t cell_of(const Position& p) const;
  std::array<int, 3> cell_coords(std::size_t flat) const;
};

struct Neuron {
  int id = 0;
  int class_id = 0;
  int ncell_id = 0;
  int node_index = 0;
  Position position{};
};

struct Synapse {
  int pre = 0;
  int post = 0;
  int receptor_class = 0;
  double weight = 0.0;
  int sign = 1;
};

struct NCell {
  int id = 0;
  std::vector<int> node_neurons;  // neuron ids in node order
  std::vector<Synapse> synapses;
  std::vector<double> psi;        // one averaging weight per node
};

struct GSpec {
  enum class Kind { Sum, Max, Const };
  Kind kind = Kind::Sum;
  double constant = 1.0;  // used by Const

  double operator()(std::span<const double> chi_at_point) const;
};

const char* to_string(GSpec::Kind kind);
GSpec::Kind parse_g_kind(const std::string& name);

struct Compartment {
  SpatialDomain domain;
  std::vector<NeurotransmitterClass> classes;  // ids 0..n-1 in order
  std::vector<NCell> ncells;                   // sorted by id
  std::vector<Neuron> neurons;                 // sorted by id
  std::vector<std::vector<double>> rho;        // [class][lattice point]
  std::vector<std::vector<double>> chi;        // [ncell index][lattice point]
  GSpec g;
  // Lets a synapse's postsynaptic node live in another n-cell (the edge is
  // owned by the presynaptic neuron's n-cell).
  bool cross_cell_edges = false;

  // Rebuilds the id -> index lookups; call after editing neurons or ncells.
  void reindex();
  // Index of a neuron / n-cell id, or -1 when absent.
  long neuron_index(int id) const;
  long ncell_index(int id) const;

  std::size_t neuron_count() const { return neurons.size(); }

 private:
  std::unordered_map<int, std::size_t> neuron_lookup_;
  std::unordered_map<int, std::size_t> ncell_lookup_;
};

struct Violation {
  std::string rule;    // short machine-readable tag, e.g. "rho-normalization"
  std::string entity;  // e.g. "class 0", "neuron 12", "ncell 3 synapse 4"
  double measured = 0.0;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

ValidationReport validate_compartment(const Compartment& c);

// Quadrature of a lattice field: sum(values) * cell volume.
double lattice_integral(const SpatialDomain& domain, std::span<const double> values);

// Hex SHA-256 over every structural field (geometry, classes, graphs, fields, g).
std::string structure_checksum(const Compartment& c);

}  // namespace ncell
