#pragma once

// Inline right-hand side shared by the network kernels and hh_derivative.
// State layout per neuron: [V, m, h, n, rise_0, decay_0, rise_1, decay_1, ...].

#include <cmath>

#include "ncell/hh.hpp"

namespace ncell::detail {

inline constexpr int kMembraneVars = 4;

// All six rates use exponentials of V with slopes 1/10, 1/18, 1/20 and 1/80
// mV^-1, which are integer powers of q = exp(-(V+65)/720):
//   exp(-(V+65)/80) = q^9, exp(-(V+65)/20) = q^36, exp(-(V+65)/18) = q^40,
//   exp(-(V+40)/10) = e^{5/2} q^72.
// One exp call per evaluation; the products cost ~1e-14 relative error.
inline GatingRates rates(double V) {
  constexpr double kE5Halves = 12.182493960703473;          // e^{5/2}
  constexpr double kSqrtE = 1.6487212707001282;             // e^{1/2}
  constexpr double kEMinusThreeHalves = 0.22313016014842982;  // e^{-3/2}
  const double q = std::exp(-(V + 65.0) / 720.0);
  const double q2 = q * q;
  const double q4 = q2 * q2;
  const double q9 = q4 * q4 * q;
  const double q36 = (q9 * q9) * (q9 * q9);
  const double q40 = q36 * q4;
  const double e10 = kE5Halves * (q36 * q36);  // exp(-(V+40)/10)

  // x / (1 - exp(-x)); near x = 0 the series avoids dividing the ~1e-14
  // error of e10 by a tiny denominator.
  const auto trap = [](double x, double emx) { return std::abs(x) < 1e-4 ? 1.0 + x * (0.5 + x / 12.0) : x / (1.0 - emx); };
  const double xm = (V + 40.0) / 10.0;
  const double xn = (V + 55.0) / 10.0;
  GatingRates r;
  r.alpha_m = trap(xm, e10);
  r.beta_m = 4.0 * q40;
  r.alpha_h = 0.07 * q36;
  r.beta_h = 1.0 / (1.0 + kSqrtE * e10);  // exp(-(V+35)/10) = e^{1/2} e10
  r.alpha_n = 0.1 * trap(xn, kEMinusThreeHalves * e10);
  r.beta_n = 0.125 * q9;
  return r;
}

inline double ionic_current(double V, double m, double h, double n, const HHParameters& p) {
  const double m3 = m * m * m;
  const double n2 = n * n;
  return p.g_Na * m3 * h * (V - p.E_Na) + p.g_K * n2 * n2 * (V - p.E_K) + p.g_L * (V - p.E_L);
}

// `channels` receptor channels, laid out compactly after the membrane
// variables; ch[c] describes the c-th of them.
inline void rhs(const double* y, double* dy, int channels, const ReceptorChannel* const* ch,
                double I_ext, const HHParameters& p) {
  const double V = y[0], m = y[1], h = y[2], n = y[3];
  const auto r = rates(V);
  double I_syn = 0.0;
  for (int c = 0; c < channels; ++c) {
    const double rise = y[kMembraneVars + 2 * c];
    const double decay = y[kMembraneVars + 2 * c + 1];
    I_syn += ch[c]->conductance_per_gate * decay * (ch[c]->reversal_mV - V);
    dy[kMembraneVars + 2 * c] = -rise / ch[c]->tau_rise;
    dy[kMembraneVars + 2 * c + 1] = rise / ch[c]->tau_rise - decay / ch[c]->tau_decay;
  }
  dy[0] = (I_ext + I_syn - ionic_current(V, m, h, n, p)) / p.C_m;
  dy[1] = r.alpha_m * (1.0 - m) - r.beta_m * m;
  dy[2] = r.alpha_h * (1.0 - h) - r.beta_h * h;
  dy[3] = r.alpha_n * (1.0 - n) - r.beta_n * n;
}

}  // namespace ncell::detail
