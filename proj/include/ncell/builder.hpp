#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ncell/compartment.hpp"

namespace ncell {

struct NodeDescription {
  int neuron_id = 0;
  int class_id = 0;
  std::optional<Position> position;  // sampled from the class density when absent
  double psi = 1.0;
};

struct SynapseDescription {
  int pre = 0;
  int post = 0;
  std::optional<int> receptor_class;  // defaults to the presynaptic class
  double weight = 1.0;
  std::optional<int> sign;            // defaults to the receptor class action
};

struct NCellDescription {
  int id = 0;
  std::vector<NodeDescription> nodes;
  std::vector<SynapseDescription> synapses;
};

// Structured input to the builder; fields are already resolved to lattice
// values (the spec-file reader loads inline arrays and grid files).
struct CompartmentDescription {
  SpatialDomain domain;
  std::vector<NeurotransmitterClass> classes;
  std::vector<NCellDescription> ncells;
  std::map<int, std::vector<double>> rho;  // by class id
  std::map<int, std::vector<double>> chi;  // by n-cell id
  GSpec g;
  std::uint64_t sampling_seed = 1;
  bool cross_cell_edges = false;
};

// Resolves ids and samples missing positions. Throws DomainEmpty,
// DuplicateId or UnresolvedReference; does not check the value-level
// invariants, so the result may still carry validation violations.
Compartment assemble_compartment(const CompartmentDescription& desc);

// assemble_compartment followed by validation; throws InvalidCompartment
// (listing the violations) unless the report is empty.
Compartment build_compartment(const CompartmentDescription& desc);

// Throws InvalidCompartment when the report is non-empty.
void require_valid(const Compartment& c);

}  // namespace ncell
