#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncell/compartment.hpp"
#include "ncell/dynamics.hpp"

namespace ncell::striatum {

// St1A / St1B: spiny projection neurons (to GPe / GPi), St2: dopaminergic,
// St3: GABAergic interneurons, St4: cholinergic interneurons.
enum class Population { St1A = 0, St1B = 1, St2 = 2, St3 = 3, St4 = 4 };
inline constexpr std::size_t kPopulations = 5;

const char* to_string(Population p);
Population parse_population(const std::string& name);

// Transmitter classes of the striatal compartment, in class-id order.
enum class Transmitter { GABA = 0, DA = 1, ACh = 2 };
Transmitter transmitter_of(Population p);

struct EdgeType {
  Population pre;
  Population post;
  int sign;  // +1 excitatory, -1 inhibitory
};

// The microcircuit's allowed projections with their action on the target.
const std::vector<EdgeType>& microcircuit_edges();
std::optional<int> edge_sign(Population pre, Population post);

// Probabilities are quoted for the reference 8 x 8 tile. Smaller tiles scale
// them by (8 / block)^2, capped at 1, so the expected in-degree is unchanged.
inline constexpr int kReferenceBlockSide = 8;

struct EdgeRule {
  double p_within = 0.1;     // pair probability inside one n-cell
  double p_adjacent = 0.02;  // pair probability across edge-adjacent n-cells
  double weight = 1.0;       // dimensionless synapse weight
};

struct StriatumParams {
  int total_neurons = 6400;
  // St1A, St1B, St2, St3, St4.
  std::array<double, kPopulations> fractions{0.48, 0.48, 0.01, 0.015, 0.015};
  int grid_side = 0;   // lattice cells per axis; 0 derives round(sqrt(total_neurons))
  int block_side = 0;  // n-cell tile edge in lattice cells; 0 = max(3, round(grid / 10))
  std::map<std::pair<Population, Population>, EdgeRule> edges;  // empty = defaults for every edge
  double rho_perturbation = 0.2;
  std::uint64_t seed = 1;

  // Membrane and receptor settings written into the compartment's classes.
  double spiny_leak_shift_mV = 22.0;  // added to E_L of the GABA class
  double gaba_g_peak = 0.2;
  double gaba_tau_rise_ms = 2.0;
  double da_g_peak = 1.0;
  double ach_g_peak = 1.0;

  // Stimulus onto the central cholinergic neuron.
  double stimulus_amplitude = 10.0;

  int resolved_grid_side() const;
  int resolved_block_side() const;
  EdgeRule rule(Population pre, Population post) const;
  // rule() with the tile-size scaling applied; what the builder samples.
  EdgeRule effective_rule(Population pre, Population post) const;
};

// Validates fractions (InvalidFractions) and edge table (ForbiddenEdge).
void check_params(const StriatumParams& p);

// Largest-remainder rounding of fraction * total, summing exactly to total.
std::array<int, kPopulations> population_counts(const StriatumParams& p);

struct StriatumModel {
  Compartment compartment;
  ModelParameters dynamics;
  std::vector<Population> population;  // per neuron index
};

StriatumModel build_striatum_model(const StriatumParams& p);
Compartment build_striatum(const StriatumParams& p);
ModelParameters striatum_dynamics(const StriatumParams& p);

// Constant drive onto the cholinergic neuron closest to the domain centre,
// active over [0, duration).
StimulusSpec demo_stimulus(const Compartment& c, double duration_ms, double amplitude = 10.0);

}  // namespace ncell::striatum
