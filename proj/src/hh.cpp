#include "ncell/hh.hpp"

#include <cmath>
#include <string>

#include "ncell/detail/hh_kernel.hpp"
#include "ncell/error.hpp"

namespace ncell {
namespace {

struct Steady {
  double m, h, n;
};

Steady steady_gates(double V) {
  const auto r = detail::rates(V);
  return {r.alpha_m / (r.alpha_m + r.beta_m), r.alpha_h / (r.alpha_h + r.beta_h),
          r.alpha_n / (r.alpha_n + r.beta_n)};
}

// dV/dt * C_m of the silent membrane with gates at steady state.
double silent_current(double V, const HHParameters& p) {
  const auto s = steady_gates(V);
  return -detail::ionic_current(V, s.m, s.h, s.n, p);
}

}  // namespace

double SynapseParameters::unit_peak() const {
  const double t_peak = tau_rise * tau_decay / (tau_decay - tau_rise) * std::log(tau_decay / tau_rise);
  return tau_decay / (tau_decay - tau_rise) *
         (std::exp(-t_peak / tau_decay) - std::exp(-t_peak / tau_rise));
}

ReceptorChannel ReceptorChannel::from(const SynapseParameters& p, double reversal_mV) {
  if (!(p.tau_rise > 0.0 && p.tau_rise < p.tau_decay) || !(p.g_peak_scale >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "synapse parameters need 0 < tau_rise < tau_decay and g_peak_scale >= 0");
  }
  return {reversal_mV, p.tau_rise, p.tau_decay, p.g_peak_scale / p.unit_peak()};
}

GatingRates gating_rates(double V) { return detail::rates(V); }

double resting_potential(const HHParameters& p) {
  if (!(p.C_m > 0.0 && p.g_Na > 0.0 && p.g_K > 0.0 && p.g_L > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "HH conductances and capacitance must be positive");
  }
  // First downward zero crossing of the silent current scanning up from
  // -120 mV: below it the membrane depolarises, above it repolarises.
  constexpr double kStep = 0.25;
  double lo = -120.0;
  double f_lo = silent_current(lo, p);
  for (double v = lo + kStep; v <= 40.0; v += kStep) {
    const double f = silent_current(v, p);
    if (f_lo > 0.0 && f <= 0.0) {
      double a = v - kStep, b = v;
      for (int it = 0; it < 200 && b - a > 0.0; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        if (silent_current(mid, p) > 0.0) a = mid; else b = mid;
      }
      return std::abs(silent_current(a, p)) < std::abs(silent_current(b, p)) ? a : b;
    }
    lo = v;
    f_lo = f;
  }
  throw Error(ErrorCode::InvalidConfig, "membrane has no resting equilibrium in [-120, 40] mV");
}

NeuronState resting_state(const HHParameters& p, std::size_t channels) {
  NeuronState s;
  s.V = resting_potential(p);
  const auto g = steady_gates(s.V);
  s.m = g.m;
  s.h = g.h;
  s.n = g.n;
  s.s.assign(channels, GatePair{});
  return s;
}

NeuronState hh_derivative(const NeuronState& state, std::span<const ReceptorChannel> channels,
                          double I_ext, const HHParameters& p) {
  if (state.s.size() != channels.size()) {
    throw Error(ErrorCode::ShapeMismatch, "state has " + std::to_string(state.s.size()) +
                                              " gate pairs for " + std::to_string(channels.size()) +
                                              " channels");
  }
  std::vector<double> y(detail::kMembraneVars + 2 * channels.size());
  std::vector<double> dy(y.size());
  y[0] = state.V;
  y[1] = state.m;
  y[2] = state.h;
  y[3] = state.n;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    y[detail::kMembraneVars + 2 * c] = state.s[c].rise;
    y[detail::kMembraneVars + 2 * c + 1] = state.s[c].decay;
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteState, "state contains a non-finite value");
  }
  if (!std::isfinite(I_ext)) throw Error(ErrorCode::NonFiniteState, "external current is not finite");
  std::vector<const ReceptorChannel*> table;
  for (const auto& c : channels) table.push_back(&c);
  detail::rhs(y.data(), dy.data(), static_cast<int>(channels.size()), table.data(), I_ext, p);
  NeuronState d;
  d.V = dy[0];
  d.m = dy[1];
  d.h = dy[2];
  d.n = dy[3];
  d.s.resize(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    d.s[c] = {dy[detail::kMembraneVars + 2 * c], dy[detail::kMembraneVars + 2 * c + 1]};
  }
  return d;
}

}  // namespace ncell
