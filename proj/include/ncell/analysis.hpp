#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ncell/compartment.hpp"
#include "ncell/dynamics.hpp"

namespace ncell {

inline constexpr int kLowpassTaps = 255;
inline constexpr double kDefaultCutoffHz = 300.0;
inline constexpr double kDefaultBandLoHz = 10.0;
inline constexpr double kDefaultBandHiHz = 120.0;
inline constexpr double kDefaultActivationMv = 20.0;

// Hamming-windowed sinc low-pass, taps summing to one.
std::vector<double> lowpass_taps(double sample_rate, double cutoff, int taps = kLowpassTaps);

// |H(f)| of a tap set (single pass).
double fir_gain(std::span<const double> taps, double frequency, double sample_rate);

// Zero-phase low-pass: the FIR is run forward and then backward over the
// signal extended at both ends by odd reflection (taps - 1 samples), so DC
// passes unchanged and the magnitude response is |H|^2.
// Throws NyquistViolation unless 0 < cutoff < sample_rate / 2 and
// SignalTooShort when the signal is shorter than the filter.
std::vector<double> lowpass(std::span<const double> signal, double sample_rate,
                            double cutoff = kDefaultCutoffHz);

struct Spectrum {
  std::vector<double> frequencies;  // Hz, strictly increasing from 0
  std::vector<double> power;        // one-sided density, units^2 / Hz
};

// Welch estimate: Hann window, 50% overlap, segment length the largest power
// of two <= length / 4, per-segment mean removed. Throws SignalTooShort below
// 64 samples.
Spectrum periodogram(std::span<const double> signal, double sample_rate);

// Frequency of maximum power within [lo, hi]; ties go to the lower frequency.
double dominant_frequency(const Spectrum& spectrum, double lo, double hi);

struct SpectrumReport {
  double sample_rate = 0.0;
  double cutoff_hz = kDefaultCutoffHz;
  std::vector<double> filtered;
  std::vector<double> frequencies;
  std::vector<double> power;
  double dominant_hz = 0.0;
  double band_lo = kDefaultBandLoHz;
  double band_hi = kDefaultBandHiHz;
};

// lowpass -> periodogram -> dominant_frequency.
SpectrumReport analyze_signal(std::span<const double> signal, double sample_rate,
                              double cutoff = kDefaultCutoffHz, double band_lo = kDefaultBandLoHz,
                              double band_hi = kDefaultBandHiHz);

// Sample rate implied by a uniform time axis in ms. Throws InvalidConfig when
// the axis is too short or not uniform.
double sample_rate_from_times(std::span<const double> times_ms);

// First upward crossing of u over threshold per neuron id (linear
// interpolation between samples). Neurons that never cross are absent.
std::map<int, double> activation_latencies(const SimulationRecord& record, double threshold_mV);

struct RadialityReport {
  Position source{};
  std::map<int, double> latencies;
  double pearson_r = 0.0;
  std::size_t n_active = 0;
};

// Pearson correlation between distance from source and latency over the
// neurons present in both maps. Throws TooFewActive below three neurons.
RadialityReport radiality_score(const std::map<int, double>& latencies,
                                const std::map<int, Position>& positions, const Position& source);

double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace ncell
