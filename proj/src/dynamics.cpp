#include "ncell/dynamics.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <climits>
#include <cmath>
#include <sstream>

#include "ncell/detail/hh_kernel.hpp"
#include "ncell/error.hpp"

namespace ncell {
namespace {

constexpr int kMaxStride = detail::kMembraneVars + 2 * kMaxChannels;

// Advances neuron i in place. Reads only its own slot plus the previous
// step's spike flags, so any iteration order gives the same result.
inline int advance_neuron(const Network& net, NetworkState& st, std::size_t i, double t, double dt,
                          double I_ext, bool& unstable) {
  const int stride = st.stride;
  double* slot = st.y.data() + i * stride;

  const auto offsets = net.in_offsets();
  const auto pre = net.in_pre();
  const auto chan = net.in_channel();
  const auto weight = net.in_weight();
  // A spike at t_s < t is an impulse into the rise gate at t_s. The gates are
  // linear, so their state at t is known in closed form; adding it here keeps
  // delivery exact instead of delayed to the step boundary.
  for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
    if (!st.spiked[pre[k]]) continue;
    const ReceptorChannel& rc = net.receptor_channels()[chan[k]];
    const double lag = std::clamp(t - st.spike_time[pre[k]], 0.0, dt);
    const double er = std::exp(-lag / rc.tau_rise), ed = std::exp(-lag / rc.tau_decay);
    slot[detail::kMembraneVars + 2 * chan[k]] += weight[k] * er;
    slot[detail::kMembraneVars + 2 * chan[k] + 1] += weight[k] * rc.tau_decay / (rc.tau_decay - rc.tau_rise) * (ed - er);
  }

  // Integrate the membrane plus the used channels in a compact local layout.
  const auto used = net.used_channels(i);
  const int channels = static_cast<int>(used.size());
  const int width = detail::kMembraneVars + 2 * channels;
  std::array<const ReceptorChannel*, kMaxChannels> ch;
  std::array<double, kMaxStride> y0, k1, k2, k3, k4, tmp;
  std::copy(slot, slot + detail::kMembraneVars, y0.begin());
  for (int c = 0; c < channels; ++c) {
    ch[c] = net.receptor_channels() + used[c];
    y0[detail::kMembraneVars + 2 * c] = slot[detail::kMembraneVars + 2 * used[c]];
    y0[detail::kMembraneVars + 2 * c + 1] = slot[detail::kMembraneVars + 2 * used[c] + 1];
  }
  const auto& hh = net.membrane(i);
  const double half = 0.5 * dt;

  detail::rhs(y0.data(), k1.data(), channels, ch.data(), I_ext, hh);
  for (int v = 0; v < width; ++v) tmp[v] = y0[v] + half * k1[v];
  detail::rhs(tmp.data(), k2.data(), channels, ch.data(), I_ext, hh);
  for (int v = 0; v < width; ++v) tmp[v] = y0[v] + half * k2[v];
  detail::rhs(tmp.data(), k3.data(), channels, ch.data(), I_ext, hh);
  for (int v = 0; v < width; ++v) tmp[v] = y0[v] + dt * k3[v];
  detail::rhs(tmp.data(), k4.data(), channels, ch.data(), I_ext, hh);
  const double sixth = dt / 6.0;
  std::array<double, kMaxStride> y1;
  for (int v = 0; v < width; ++v) y1[v] = y0[v] + sixth * (k1[v] + 2.0 * k2[v] + 2.0 * k3[v] + k4[v]);
  std::copy(y1.begin(), y1.begin() + detail::kMembraneVars, slot);
  for (int c = 0; c < channels; ++c) {
    slot[detail::kMembraneVars + 2 * used[c]] = y1[detail::kMembraneVars + 2 * c];
    slot[detail::kMembraneVars + 2 * used[c] + 1] = y1[detail::kMembraneVars + 2 * c + 1];
  }

  int clamps = 0;
  for (int g = 1; g <= 3; ++g) {
    if (slot[g] < 0.0) {
      slot[g] = 0.0;
      ++clamps;
    } else if (slot[g] > 1.0) {
      slot[g] = 1.0;
      ++clamps;
    }
  }

  const double v_old = y0[0];
  const double v_new = slot[0];
  unsigned char fired = 0;
  if (v_old < kSpikeThreshold && v_new >= kSpikeThreshold) {
    fired = 1;
    st.spike_time[i] = t + dt * (kSpikeThreshold - v_old) / (v_new - v_old);
  }
  st.spiked_next[i] = fired;
  unstable = !(std::abs(v_new) <= kUnstableVoltage);
  return clamps;
}

void check_step(const Network& net, double dt, std::span<const double> I_ext,
                const NetworkState& state) {
  if (!(dt > 0.0) || dt > kMaxStableDt) {
    throw Error(ErrorCode::InvalidConfig, "dt must lie in (0, 0.05] ms for RK4 on HH");
  }
  if (I_ext.size() != net.size() || state.y.size() != net.size() * net.stride()) {
    throw Error(ErrorCode::ShapeMismatch, "state or current vector does not match the network");
  }
}

[[noreturn]] void throw_unstable(const Network& net, const NetworkState& st, std::size_t i, double t) {
  (void)net;
  std::ostringstream os;
  os << "|V| exceeded " << kUnstableVoltage << " mV at neuron index " << i << " (V = " << st.V(i)
     << " mV) during the step starting at t = " << t << " ms";
  throw Error(ErrorCode::UnstableIntegration, os.str());
}

}  // namespace

ModelParameters ModelParameters::defaults(std::size_t class_count) {
  ModelParameters p;
  p.per_class.resize(class_count);
  return p;
}

void validate_config(const SimulationConfig& config) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
    throw Error(ErrorCode::InvalidConfig, "dt must be > 0");
  }
  if (!(config.duration >= config.dt) || !std::isfinite(config.duration)) {
    throw Error(ErrorCode::InvalidConfig, "duration must be >= dt");
  }
  if (config.record_every < 1) throw Error(ErrorCode::InvalidConfig, "record_every must be >= 1");
  for (std::size_t k = 0; k < config.stimuli.size(); ++k) {
    const auto& s = config.stimuli[k];
    if (!(s.onset < s.offset) || s.offset > config.duration || !std::isfinite(s.amplitude)) {
      throw Error(ErrorCode::InvalidConfig,
                  "stimulus " + std::to_string(k) + " needs onset < offset <= duration and a finite amplitude");
    }
  }
}

std::vector<std::size_t> select_neurons(const Compartment& c, const NeuronSelector& sel) {
  std::vector<std::size_t> out;
  switch (sel.kind) {
    case NeuronSelector::Kind::ClassLabel: {
      int class_id = -1;
      for (const auto& cls : c.classes) {
        if (cls.label == sel.label) class_id = cls.id;
      }
      if (class_id < 0) throw Error(ErrorCode::UnresolvedReference, "no class labelled '" + sel.label + "'");
      for (std::size_t k = 0; k < c.neurons.size(); ++k) {
        if (c.neurons[k].class_id == class_id) out.push_back(k);
      }
      break;
    }
    case NeuronSelector::Kind::NCell: {
      if (c.ncell_index(sel.ncell) < 0) {
        throw Error(ErrorCode::UnresolvedReference, "no n-cell " + std::to_string(sel.ncell));
      }
      for (std::size_t k = 0; k < c.neurons.size(); ++k) {
        if (c.neurons[k].ncell_id == sel.ncell) out.push_back(k);
      }
      break;
    }
    case NeuronSelector::Kind::Ids:
      for (int id : sel.ids) {
        const long k = c.neuron_index(id);
        if (k < 0) throw Error(ErrorCode::UnresolvedReference, "stimulus targets missing neuron " + std::to_string(id));
        out.push_back(static_cast<std::size_t>(k));
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      break;
  }
  return out;
}

Network::Network(const Compartment& c, const ModelParameters& params) {
  const std::size_t classes = c.classes.size();
  if (params.per_class.size() != classes) {
    throw Error(ErrorCode::InvalidConfig, "model parameters cover " + std::to_string(params.per_class.size()) +
                                              " classes, compartment has " + std::to_string(classes));
  }
  channels_ = static_cast<int>(2 * classes);
  if (channels_ > kMaxChannels) {
    throw Error(ErrorCode::InvalidConfig, "at most " + std::to_string(kMaxChannels / 2) + " classes are supported");
  }
  for (std::size_t z = 0; z < classes; ++z) {
    const auto& cls = c.classes[z];
    const auto& syn = params.per_class[z].synapse;
    const double exc = cls.is_modulatory ? syn.excitatory_reversal_mV : cls.synaptic_reversal_mV;
    const double inh = cls.is_modulatory ? syn.inhibitory_reversal_mV : cls.synaptic_reversal_mV;
    channel_table_.push_back(ReceptorChannel::from(syn, exc));
    channel_table_.push_back(ReceptorChannel::from(syn, inh));
    class_hh_.push_back(params.per_class[z].hh);
    class_rest_.push_back(ncell::resting_potential(params.per_class[z].hh));
  }

  const std::size_t n = c.neurons.size();
  neuron_class_.resize(n);
  for (std::size_t k = 0; k < n; ++k) neuron_class_[k] = c.neurons[k].class_id;

  struct Edge {
    std::size_t post, pre;
    int channel;
    double weight;
  };
  std::vector<Edge> edges;
  for (const auto& cell : c.ncells) {
    for (const auto& s : cell.synapses) {
      edges.push_back({static_cast<std::size_t>(c.neuron_index(s.post)),
                       static_cast<std::size_t>(c.neuron_index(s.pre)),
                       2 * s.receptor_class + (s.sign < 0 ? 1 : 0), s.weight});
    }
  }
  // Stable sort keeps declaration order among a target's inputs, which fixes
  // the summation order of simultaneous increments.
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.post < b.post; });
  in_offsets_.assign(n + 1, 0);
  for (const auto& e : edges) ++in_offsets_[e.post + 1];
  for (std::size_t k = 0; k < n; ++k) in_offsets_[k + 1] += in_offsets_[k];
  for (const auto& e : edges) {
    in_pre_.push_back(e.pre);
    in_channel_.push_back(e.channel);
    in_weight_.push_back(e.weight);
  }
  used_offsets_.assign(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::array<bool, kMaxChannels> seen{};
    for (std::size_t e = in_offsets_[k]; e < in_offsets_[k + 1]; ++e) seen[in_channel_[e]] = true;
    for (int ch = 0; ch < channels_; ++ch) {
      if (seen[ch]) used_channels_.push_back(ch);
    }
    used_offsets_[k + 1] = used_channels_.size();
  }
}

NetworkState resting_network_state(const Network& net) {
  NetworkState st;
  st.stride = net.stride();
  st.y.assign(net.size() * st.stride, 0.0);
  std::vector<NeuronState> rest;
  for (const auto& hh : net.class_membranes()) rest.push_back(resting_state(hh));
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& r = rest[net.neuron_class(i)];
    double* slot = st.y.data() + i * st.stride;
    slot[0] = r.V;
    slot[1] = r.m;
    slot[2] = r.h;
    slot[3] = r.n;
  }
  st.spiked.assign(net.size(), 0);
  st.spiked_next.assign(net.size(), 0);
  st.spike_time.assign(net.size(), 0.0);
  return st;
}

StepStats step_network(const Network& net, NetworkState& state, double t, double dt,
                       std::span<const double> I_ext, int threads) {
  check_step(net, dt, I_ext, state);
  const long n = static_cast<long>(net.size());
  const int workers = threads > 0 ? threads : omp_get_max_threads();
  std::uint64_t clamps = 0;
  long first_bad = LONG_MAX;
#pragma omp parallel for schedule(static) num_threads(workers) reduction(+ : clamps) reduction(min : first_bad)
  for (long i = 0; i < n; ++i) {
    bool unstable = false;
    clamps += static_cast<std::uint64_t>(advance_neuron(net, state, static_cast<std::size_t>(i), t, dt, I_ext[i], unstable));
    if (unstable) first_bad = std::min(first_bad, i);
  }
  if (first_bad != LONG_MAX) throw_unstable(net, state, static_cast<std::size_t>(first_bad), t);
  state.spiked.swap(state.spiked_next);
  return {clamps};
}

StepStats step_network_serial(const Network& net, NetworkState& state, double t, double dt,
                              std::span<const double> I_ext) {
  check_step(net, dt, I_ext, state);
  std::uint64_t clamps = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    bool unstable = false;
    clamps += static_cast<std::uint64_t>(advance_neuron(net, state, i, t, dt, I_ext[i], unstable));
    if (unstable) throw_unstable(net, state, i, t);
  }
  state.spiked.swap(state.spiked_next);
  return {clamps};
}

SimulationRecord simulate(const Compartment& c, const SimulationConfig& config,
                          const ModelParameters& params) {
  validate_config(config);
  if (config.dt > kMaxStableDt) {
    throw Error(ErrorCode::InvalidConfig, "dt must be <= 0.05 ms for RK4 on HH");
  }
  const Network net(c, params);
  auto state = resting_network_state(net);
  const std::size_t n = net.size();

  struct Drive {
    std::vector<std::size_t> targets;
    double amplitude, onset, offset;
  };
  std::vector<Drive> drives;
  for (const auto& s : config.stimuli) drives.push_back({select_neurons(c, s.target), s.amplitude, s.onset, s.offset});

  const auto steps = static_cast<std::uint64_t>(std::llround(config.duration / config.dt));
  SimulationRecord rec;
  rec.neuron_ids.reserve(n);
  for (const auto& neuron : c.neurons) rec.neuron_ids.push_back(neuron.id);
  rec.spikes.resize(n);
  const std::size_t rows = steps / config.record_every + 1;
  rec.times.reserve(rows);
  rec.u.reserve(rows * n);

  std::vector<double> rest(n);
  for (std::size_t i = 0; i < n; ++i) rest[i] = net.resting_potential(i);
  const auto record_row = [&](double t) {
    rec.times.push_back(t);
    for (std::size_t i = 0; i < n; ++i) rec.u.push_back(state.V(i) - rest[i]);
  };

  std::vector<double> current(n, 0.0);
  std::vector<unsigned char> active(drives.size(), 0);
  record_row(0.0);
  for (std::uint64_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    bool changed = false;
    for (std::size_t d = 0; d < drives.size(); ++d) {
      const unsigned char on = (t >= drives[d].onset && t < drives[d].offset) ? 1 : 0;
      changed = changed || on != active[d];
      active[d] = on;
    }
    if (changed) {
      std::fill(current.begin(), current.end(), 0.0);
      for (std::size_t d = 0; d < drives.size(); ++d) {
        if (!active[d]) continue;
        for (auto i : drives[d].targets) current[i] += drives[d].amplitude;
      }
    }
    rec.clamp_events += step_network(net, state, t, config.dt, current, config.threads).clamp_events;
    for (std::size_t i = 0; i < n; ++i) {
      if (state.spiked[i]) rec.spikes[i].push_back(state.spike_time[i]);
    }
    if ((k + 1) % static_cast<std::uint64_t>(config.record_every) == 0) {
      record_row(static_cast<double>(k + 1) * config.dt);
    }
  }
  rec.steps = steps;
  return rec;
}

}  // namespace ncell
