#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ncell/compartment.hpp"
#include "ncell/dynamics.hpp"

namespace ncell {

// The averaging transformation is linear in the synaptic potentials with
// time-independent coefficients, so it folds into one weight per neuron:
//   w[x] = psi(x) * dy * sum_y rho^{z(x)}(y) * chi_{i(x)}(y) / (|I| * g(chi(y)))
// Lattice points with g below kGZeroGuard are skipped.
struct AveragingWeights {
  std::vector<int> neuron_ids;  // ascending
  std::vector<double> w;        // aligned with neuron_ids
  GSpec::Kind g_kind = GSpec::Kind::Sum;
  std::array<int, 3> resolution{};
  std::string checksum;         // structure_checksum of the source compartment

  double weight_of(int neuron_id) const;
};

// Both throw InvalidCompartment if validation fails. The parallel build sums
// every (class, n-cell) coefficient in lattice order, matching the serial one
// bit for bit.
AveragingWeights precompute_weights(const Compartment& c, int threads = 0);
AveragingWeights precompute_weights_serial(const Compartment& c);

// v = sum_x w[x] * u[x] in ascending id order. Throws MissingNeuron when a
// neuron with nonzero weight is absent from the snapshot.
double average(const AveragingWeights& wts, const std::map<int, double>& u_snapshot);
// Snapshot aligned with wts.neuron_ids.
double average(const AveragingWeights& wts, std::span<const double> u_aligned);

// Direct evaluation of the averaging integral by explicit loops over classes,
// lattice points, n-cells and nodes, with no precomputation. Test oracle.
double average_naive(const Compartment& c, const std::map<int, double>& u_snapshot);

// v(t) for every recorded row. Throws ShapeMismatch if the record's neuron
// columns differ from the weights.
std::vector<double> average_trace(const AveragingWeights& wts, const SimulationRecord& record,
                                  int threads = 0);
std::vector<double> average_trace_serial(const AveragingWeights& wts, const SimulationRecord& record);

}  // namespace ncell
