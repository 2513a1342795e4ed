#include "ncell/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "ncell/error.hpp"

namespace ncell {
namespace {

constexpr double kPi = std::numbers::pi;

void causal_fir(std::span<const double> taps, std::span<const double> in, std::vector<double>& out) {
  const std::size_t n = in.size();
  const std::size_t m = taps.size();
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t kmax = std::min(m - 1, i);
    double acc = 0.0;
    for (std::size_t k = 0; k <= kmax; ++k) acc += taps[k] * in[i - k];
    out[i] = acc;
  }
}

struct FftwPlan {
  double* in;
  fftw_complex* out;
  fftw_plan plan;

  explicit FftwPlan(std::size_t n)
      : in(fftw_alloc_real(n)),
        out(fftw_alloc_complex(n / 2 + 1)),
        plan(fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE)) {}
  ~FftwPlan() {
    fftw_destroy_plan(plan);
    fftw_free(out);
    fftw_free(in);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
};

}  // namespace

std::vector<double> lowpass_taps(double sample_rate, double cutoff, int taps) {
  if (!(cutoff > 0.0) || !(cutoff < 0.5 * sample_rate)) {
    throw Error(ErrorCode::NyquistViolation, "cutoff " + std::to_string(cutoff) +
                                                 " Hz must lie strictly between 0 and Nyquist (" +
                                                 std::to_string(0.5 * sample_rate) + " Hz)");
  }
  if (taps < 3 || taps % 2 == 0) throw Error(ErrorCode::InvalidConfig, "tap count must be odd and >= 3");
  const double fc = cutoff / sample_rate;
  const int mid = taps / 2;
  std::vector<double> h(taps);
  double sum = 0.0;
  // Left half computed, right half mirrored, so the taps are exactly symmetric.
  for (int k = 0; k <= mid; ++k) {
    const int j = mid - k;
    const double sinc = j == 0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * j) / (kPi * j);
    const double window = 0.54 - 0.46 * std::cos(2.0 * kPi * k / (taps - 1));
    h[k] = h[taps - 1 - k] = sinc * window;
  }
  for (double v : h) sum += v;
  for (double& v : h) v /= sum;
  return h;
}

double fir_gain(std::span<const double> taps, double frequency, double sample_rate) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 0; k < taps.size(); ++k) {
    acc += taps[k] * std::polar(1.0, -2.0 * kPi * frequency * static_cast<double>(k) / sample_rate);
  }
  return std::abs(acc);
}

std::vector<double> lowpass(std::span<const double> signal, double sample_rate, double cutoff) {
  const auto taps = lowpass_taps(sample_rate, cutoff);
  const std::size_t n = signal.size();
  if (n < taps.size()) {
    throw Error(ErrorCode::SignalTooShort, "low-pass needs at least " + std::to_string(taps.size()) +
                                               " samples, got " + std::to_string(n));
  }
  const std::size_t pad = taps.size() - 1;
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * signal[0] - signal[k]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - k]);

  std::vector<double> forward, backward;
  causal_fir(taps, ext, forward);
  std::reverse(forward.begin(), forward.end());
  causal_fir(taps, forward, backward);
  std::reverse(backward.begin(), backward.end());
  return {backward.begin() + static_cast<long>(pad), backward.begin() + static_cast<long>(pad + n)};
}

Spectrum periodogram(std::span<const double> signal, double sample_rate) {
  const std::size_t n = signal.size();
  if (n < 64) {
    throw Error(ErrorCode::SignalTooShort, "periodogram needs at least 64 samples, got " + std::to_string(n));
  }
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "sample rate must be positive");
  std::size_t seg = 1;
  while (seg * 2 <= n / 4) seg *= 2;
  const std::size_t step = seg / 2;
  const std::size_t bins = seg / 2 + 1;

  std::vector<double> window(seg);
  double window_power = 0.0;
  for (std::size_t k = 0; k < seg; ++k) {
    window[k] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(seg));
    window_power += window[k] * window[k];
  }
  const double scale = 1.0 / (sample_rate * window_power);

  Spectrum out;
  out.frequencies.resize(bins);
  out.power.assign(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    out.frequencies[k] = static_cast<double>(k) * sample_rate / static_cast<double>(seg);
  }

  FftwPlan fft(seg);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + seg <= n; start += step, ++segments) {
    double mean = 0.0;
    for (std::size_t k = 0; k < seg; ++k) mean += signal[start + k];
    mean /= static_cast<double>(seg);
    for (std::size_t k = 0; k < seg; ++k) fft.in[k] = (signal[start + k] - mean) * window[k];
    fftw_execute(fft.plan);
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = fft.out[k][0];
      const double im = fft.out[k][1];
      double p = (re * re + im * im) * scale;
      if (k != 0 && !(seg % 2 == 0 && k == seg / 2)) p *= 2.0;
      out.power[k] += p;
    }
  }
  for (double& p : out.power) p /= static_cast<double>(segments);
  return out;
}

double dominant_frequency(const Spectrum& spectrum, double lo, double hi) {
  long best = -1;
  for (std::size_t k = 0; k < spectrum.frequencies.size(); ++k) {
    const double f = spectrum.frequencies[k];
    if (f < lo || f > hi) continue;
    if (best < 0 || spectrum.power[k] > spectrum.power[best]) best = static_cast<long>(k);
  }
  if (best < 0) {
    throw Error(ErrorCode::EmptyBand, "no spectral bin inside [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "] Hz");
  }
  return spectrum.frequencies[best];
}

SpectrumReport analyze_signal(std::span<const double> signal, double sample_rate, double cutoff,
                              double band_lo, double band_hi) {
  SpectrumReport r;
  r.sample_rate = sample_rate;
  r.cutoff_hz = cutoff;
  r.band_lo = band_lo;
  r.band_hi = band_hi;
  r.filtered = lowpass(signal, sample_rate, cutoff);
  auto spec = periodogram(r.filtered, sample_rate);
  r.dominant_hz = dominant_frequency(spec, band_lo, band_hi);
  r.frequencies = std::move(spec.frequencies);
  r.power = std::move(spec.power);
  return r;
}

double sample_rate_from_times(std::span<const double> times_ms) {
  if (times_ms.size() < 2) throw Error(ErrorCode::SignalTooShort, "time axis needs at least two samples");
  const double dt = (times_ms.back() - times_ms.front()) / static_cast<double>(times_ms.size() - 1);
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidConfig, "time axis is not increasing");
  for (std::size_t k = 1; k < times_ms.size(); ++k) {
    if (std::abs((times_ms[k] - times_ms[k - 1]) - dt) > 1e-6 * dt + 1e-9) {
      throw Error(ErrorCode::InvalidConfig, "time axis is not uniformly sampled near row " + std::to_string(k));
    }
  }
  return 1000.0 / dt;
}

std::map<int, double> activation_latencies(const SimulationRecord& record, double threshold_mV) {
  std::map<int, double> out;
  if (!std::isfinite(threshold_mV)) throw Error(ErrorCode::InvalidConfig, "threshold must be finite");
  for (std::size_t c = 0; c < record.cols(); ++c) {
    for (std::size_t r = 1; r < record.rows(); ++r) {
      const double a = record.at(r - 1, c);
      const double b = record.at(r, c);
      if (a < threshold_mV && b >= threshold_mV) {
        const double t0 = record.times[r - 1];
        const double t1 = record.times[r];
        out.emplace(record.neuron_ids[c], t0 + (t1 - t0) * (threshold_mV - a) / (b - a));
        break;
      }
    }
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double da = a[k] - ma, db = b[k] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

RadialityReport radiality_score(const std::map<int, double>& latencies,
                                const std::map<int, Position>& positions, const Position& source) {
  RadialityReport r;
  r.source = source;
  std::vector<double> dist, lat;
  for (const auto& [id, t] : latencies) {
    const auto it = positions.find(id);
    if (it == positions.end()) continue;
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) d2 += (it->second[a] - source[a]) * (it->second[a] - source[a]);
    dist.push_back(std::sqrt(d2));
    lat.push_back(t);
    r.latencies.emplace(id, t);
  }
  r.n_active = lat.size();
  if (r.n_active < 3) {
    throw Error(ErrorCode::TooFewActive, "radiality needs at least 3 active neurons with positions, got " +
                                             std::to_string(r.n_active));
  }
  r.pearson_r = pearson(dist, lat);
  return r;
}

}  // namespace ncell
