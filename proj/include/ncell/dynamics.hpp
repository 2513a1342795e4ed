#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ncell/compartment.hpp"
#include "ncell/hh.hpp"

namespace ncell {

inline constexpr int kMaxChannels = 16;
inline constexpr double kMaxStableDt = 0.05;          // ms
inline constexpr double kUnstableVoltage = 200.0;     // mV
inline constexpr double kSpikeThreshold = 0.0;        // mV, rising edge

struct ClassDynamics {
  HHParameters hh;
  SynapseParameters synapse;
};

// Per-class membrane and receptor kinetics, indexed by class id.
struct ModelParameters {
  std::vector<ClassDynamics> per_class;

  static ModelParameters defaults(std::size_t class_count);
};

struct NeuronSelector {
  enum class Kind { ClassLabel, NCell, Ids };
  Kind kind = Kind::Ids;
  std::string label;
  int ncell = 0;
  std::vector<int> ids;
};

// Constant current step on the selected neurons, active for onset <= t < offset.
struct StimulusSpec {
  NeuronSelector target;
  double amplitude = 0.0;  // uA/cm^2
  double onset = 0.0;      // ms
  double offset = 0.0;     // ms
};

struct SimulationConfig {
  double dt = 0.025;        // ms
  double duration = 100.0;  // ms
  std::uint64_t seed = 1;
  int record_every = 1;
  std::vector<StimulusSpec> stimuli;
  int threads = 0;          // 0 = OpenMP default; never affects results
};

// Throws InvalidConfig when a field breaks its invariant.
void validate_config(const SimulationConfig& config);

// Neuron indices (ascending id order) picked by a selector.
std::vector<std::size_t> select_neurons(const Compartment& c, const NeuronSelector& sel);

struct SimulationRecord {
  std::vector<int> neuron_ids;                // column order (ascending id)
  std::vector<double> times;                  // ms
  std::vector<double> u;                      // rows x neurons, row-major, mV
  std::vector<std::vector<double>> spikes;    // per neuron, ms
  std::uint64_t steps = 0;
  std::uint64_t clamp_events = 0;

  std::size_t rows() const { return times.size(); }
  std::size_t cols() const { return neuron_ids.size(); }
  double at(std::size_t row, std::size_t col) const { return u[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const { return {u.data() + r * cols(), cols()}; }
};

// Compiled synapse graph and per-neuron constants. Receptor channel of a
// synapse = 2 * receptor_class + (sign < 0), so modulatory transmitters can
// act with either sign on different targets.
class Network {
 public:
  Network(const Compartment& c, const ModelParameters& params);

  std::size_t size() const { return neuron_class_.size(); }
  int channels() const { return channels_; }
  int stride() const { return 4 + 2 * channels_; }
  double resting_potential(std::size_t neuron) const { return class_rest_[neuron_class_[neuron]]; }

  // Incoming synapses of neuron i occupy [in_offsets[i], in_offsets[i+1]).
  std::span<const std::size_t> in_offsets() const { return in_offsets_; }
  std::span<const std::size_t> in_pre() const { return in_pre_; }
  std::span<const int> in_channel() const { return in_channel_; }
  std::span<const double> in_weight() const { return in_weight_; }

  // Channels that receive at least one synapse on neuron i, ascending. The
  // others keep zero gates forever, so the kernel skips them.
  std::span<const int> used_channels(std::size_t neuron) const {
    return {used_channels_.data() + used_offsets_[neuron], used_offsets_[neuron + 1] - used_offsets_[neuron]};
  }

  int neuron_class(std::size_t neuron) const { return neuron_class_[neuron]; }
  const HHParameters& membrane(std::size_t neuron) const { return class_hh_[neuron_class_[neuron]]; }
  std::span<const HHParameters> class_membranes() const { return class_hh_; }
  const ReceptorChannel* receptor_channels() const { return channel_table_.data(); }
  std::span<const ReceptorChannel> receptor_table() const { return channel_table_; }
  std::span<const double> class_rest() const { return class_rest_; }

 private:
  int channels_ = 0;
  std::vector<int> neuron_class_;
  std::vector<HHParameters> class_hh_;
  std::vector<double> class_rest_;
  std::vector<ReceptorChannel> channel_table_;
  std::vector<std::size_t> in_offsets_;
  std::vector<std::size_t> in_pre_;
  std::vector<int> in_channel_;
  std::vector<double> in_weight_;
  std::vector<std::size_t> used_offsets_;
  std::vector<int> used_channels_;
};

// Flat integrator state. `spiked` marks neurons whose V crossed threshold
// during the last step; `spike_time` holds the interpolated crossing time.
struct NetworkState {
  int stride = 0;
  std::vector<double> y;
  std::vector<unsigned char> spiked;
  std::vector<double> spike_time;
  std::vector<unsigned char> spiked_next;  // scratch, swapped in after a step

  double V(std::size_t i) const { return y[i * stride]; }
};

NetworkState resting_network_state(const Network& net);

struct StepStats {
  std::uint64_t clamp_events = 0;
};

// One RK4 step of every neuron from t to t + dt. Spikes flagged in `state`
// from the previous step are first delivered to their targets' gates, as the
// gate state an impulse at the recorded spike time has evolved into by t.
// The OpenMP kernel and the serial reference produce bit-identical states.
// Throws UnstableIntegration (naming neuron and time) if any |V| > 200 mV.
StepStats step_network(const Network& net, NetworkState& state, double t, double dt,
                       std::span<const double> I_ext, int threads = 0);
StepStats step_network_serial(const Network& net, NetworkState& state, double t, double dt,
                              std::span<const double> I_ext);

SimulationRecord simulate(const Compartment& c, const SimulationConfig& config,
                          const ModelParameters& params);

}  // namespace ncell
