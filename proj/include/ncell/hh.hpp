#pragma once

#include <span>
#include <vector>

namespace ncell {

// Classical squid-axon membrane (mV, ms, mS/cm^2, uA/cm^2, uF/cm^2).
struct HHParameters {
  double C_m = 1.0;
  double g_Na = 120.0;
  double g_K = 36.0;
  double g_L = 0.3;
  double E_Na = 50.0;
  double E_K = -77.0;
  double E_L = -54.4;
};

// Double-exponential conductance synapse. Presynaptic spikes add the synapse
// weight to the rise gate; the decay gate integrates it, and the conductance
// peaks at g_peak_scale * weight for an isolated event.
struct SynapseParameters {
  double tau_rise = 0.5;
  double tau_decay = 5.0;
  double g_peak_scale = 1.0;
  // Reversal used by modulatory transmitters, whose action is set per synapse.
  double excitatory_reversal_mV = 0.0;
  double inhibitory_reversal_mV = -80.0;

  // Peak of the decay gate after a unit increment of the rise gate.
  double unit_peak() const;
};

// Kinetics and reversal of one receptor channel on the postsynaptic side.
struct ReceptorChannel {
  double reversal_mV = 0.0;
  double tau_rise = 0.5;
  double tau_decay = 5.0;
  double conductance_per_gate = 1.0;  // g_peak_scale / unit_peak

  static ReceptorChannel from(const SynapseParameters& p, double reversal_mV);
};

struct GatePair {
  double rise = 0.0;
  double decay = 0.0;
};

struct NeuronState {
  double V = 0.0;
  double m = 0.0;
  double h = 0.0;
  double n = 0.0;
  std::vector<GatePair> s;  // one pair per receptor channel
};

struct GatingRates {
  double alpha_m, beta_m, alpha_h, beta_h, alpha_n, beta_n;
};

GatingRates gating_rates(double V);

// Equilibrium of the silent membrane: V with steady-state gates such that
// the ionic current vanishes. Picks the most hyperpolarised stable root.
NeuronState resting_state(const HHParameters& p, std::size_t channels = 0);
double resting_potential(const HHParameters& p);

// Time derivative of the full state. Synaptic current is
// sum_c g_c(decay_c) * (E_c - V). Throws NonFiniteState on NaN/inf input.
NeuronState hh_derivative(const NeuronState& state, std::span<const ReceptorChannel> channels,
                          double I_ext, const HHParameters& p);

}  // namespace ncell
