// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//   acceptance --ncell <path to ncell executable> [--work <dir>] [criterion ...]

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include "json.hpp"
#include "ncell/analysis.hpp"
#include "ncell/averaging.hpp"
#include "ncell/dynamics.hpp"
#include "ncell/sampling.hpp"
#include "ncell/spec_file.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace ncell;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path ncell;
  fs::path work;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// Runs the CLI, returning the exit status and the wall time.
std::pair<int, double> run_cli(const Context& ctx, const std::string& args) {
  const std::string cmd = "\"" + ctx.ncell.string() + "\" " + args + " > /dev/null";
  const auto t0 = Clock::now();
  const int status = std::system(cmd.c_str());
  const double secs = seconds_since(t0);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, secs};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text_file(p)); }

double rel_err(double a, double b, double scale) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), scale, 1e-300});
}

// ---- criteria 1, 2, 6: full striatum demo ---------------------------------

struct DemoRun {
  int status = -1;
  double seconds = 0.0;
  double dominant_hz = NAN;
  double pearson_r = NAN;
  std::size_t n_active = 0;
};

DemoRun demo(const Context& ctx, const std::string& name, const std::string& extra) {
  const auto dir = ctx.work / name;
  DemoRun r;
  std::tie(r.status, r.seconds) = run_cli(ctx, "demo-striatum --force --out \"" + dir.string() + "\" " + extra);
  if (r.status != 0) return r;
  r.dominant_hz = read_json(dir / "spectrum.json").at("dominant_hz").get<double>();
  const auto rad = read_json(dir / "radiality.json");
  r.pearson_r = rad.at("pearson_r").get<double>();
  r.n_active = rad.at("n_active").get<std::size_t>();
  return r;
}

std::map<std::string, DemoRun> g_demos;

const DemoRun& full_demo(const Context& ctx, int threads) {
  const std::string name = "demo_threads" + std::to_string(threads);
  auto it = g_demos.find(name);
  if (it == g_demos.end()) it = g_demos.emplace(name, demo(ctx, name, "--threads " + std::to_string(threads))).first;
  return it->second;
}

Outcome criterion1(const Context& ctx) {
  const auto& r = full_demo(ctx, 1);
  if (r.status != 0) return {false, "demo exited with " + std::to_string(r.status)};
  return {r.dominant_hz >= 30.0 && r.dominant_hz <= 80.0,
          "dominant " + fmt(r.dominant_hz) + " Hz in [30, 80]; 6400 neurons, 2000 ms in " + fmt(r.seconds, 3) + " s"};
}

Outcome criterion2(const Context& ctx) {
  const auto& r = full_demo(ctx, 1);
  if (r.status != 0) return {false, "demo exited with " + std::to_string(r.status)};
  const auto small = demo(ctx, "demo_400", "--total-neurons 400");
  if (small.status != 0) return {false, "400-neuron demo exited with " + std::to_string(small.status)};
  const bool ok = r.pearson_r >= 0.8 && small.pearson_r >= 0.7 && small.seconds <= 10.0;
  return {ok, "full r = " + fmt(r.pearson_r) + " over " + std::to_string(r.n_active) + " neurons (>= 0.8); 400-neuron r = " +
                  fmt(small.pearson_r) + " (>= 0.7) in " + fmt(small.seconds, 3) + " s (<= 10)"};
}

Outcome criterion6(const Context& ctx) {
  const auto& a = full_demo(ctx, 1);
  const auto& b = full_demo(ctx, 2);
  if (a.status != 0 || b.status != 0) return {false, "a demo run failed"};
  bool same = true;
  std::string files;
  for (const char* f : {"record.ncg", "v_trace.csv"}) {
    const bool eq = read_text_file(ctx.work / "demo_threads1" / f) == read_text_file(ctx.work / "demo_threads2" / f);
    same = same && eq;
    files += std::string(files.empty() ? "" : ", ") + f + (eq ? " identical" : " DIFFER");
  }
  return {same, "--threads 1 vs 2: " + files};
}

// ---- criterion 3: fast averaging vs the naive oracle ----------------------

Outcome criterion3(const Context&) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::set<int> kinds;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const int kind = static_cast<int>(seed % 3);
    const auto c = testing::random_compartment(1000 + seed, kind);
    kinds.insert(kind);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-80.0, 40.0);
    std::map<int, double> u;
    for (const auto& n : c.neurons) u[n.id] = U(rng);
    const double fast = average(precompute_weights(c), u);
    const double naive = average_naive(c, u);
    worst = std::max(worst, rel_err(fast, naive, 0.0));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs <= 5.0 && kinds.size() == 3,
          "50 compartments, max rel err " + fmt(worst, 3) + " (<= 1e-9), " + fmt(secs, 3) + " s (<= 5)"};
}

// ---- criterion 4: linearity and chi-scale invariance ----------------------

Outcome criterion4(const Context&) {
  double lin = 0.0, inv = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed * 7919);
    std::uniform_real_distribution<double> U(-80.0, 40.0), S(-3.0, 3.0), K(0.1, 10.0);
    auto d = testing::random_description(5000 + seed, static_cast<int>(seed % 3));
    const auto c = build_compartment(d);
    const auto w = precompute_weights(c);
    std::vector<double> u1, u2, mix;
    const double a = S(rng), b = S(rng);
    for (std::size_t k = 0; k < w.w.size(); ++k) {
      u1.push_back(U(rng));
      u2.push_back(U(rng));
      mix.push_back(a * u1.back() + b * u2.back());
    }
    const double v1 = average(w, u1), v2 = average(w, u2);
    // Relative to the magnitude of the terms being combined, so cancellation
    // in a*v1 + b*v2 does not inflate the ratio.
    lin = std::max(lin, rel_err(average(w, mix), a * v1 + b * v2, std::abs(a * v1) + std::abs(b * v2)));

    // chi-scale invariance is a property of the sum normaliser.
    d.g.kind = GSpec::Kind::Sum;
    const auto base = precompute_weights(build_compartment(d));
    const double s = K(rng);
    for (auto& [id, chi] : d.chi)
      for (auto& v : chi) v *= s;
    const auto scaled = precompute_weights(build_compartment(d));
    for (std::size_t k = 0; k < base.w.size(); ++k) inv = std::max(inv, rel_err(base.w[k], scaled.w[k], 0.0));
  }
  return {lin <= 1e-12 && inv <= 1e-12,
          "100 cases: linearity " + fmt(lin, 3) + ", chi-scale invariance " + fmt(inv, 3) + " (<= 1e-12)"};
}

// ---- criterion 5: HH against the scalar reference -------------------------

Outcome criterion5(const Context&) {
  const auto c = build_compartment(testing::minimal_description());
  const auto params = ModelParameters::defaults(1);
  SimulationConfig cfg;
  cfg.duration = 200.0;
  StimulusSpec s;
  s.target.kind = NeuronSelector::Kind::Ids;
  s.target.ids = {0};
  s.amplitude = 10.0;
  s.offset = cfg.duration;
  cfg.stimuli = {s};
  const auto rec = simulate(c, cfg, params);
  const auto ref = testing::HHRef{}.trace(10.0, cfg.dt, cfg.duration);
  const double rest = resting_potential(HHParameters{});
  double sup = 0.0;
  for (std::size_t k = 0; k < ref.size() && k < rec.rows(); ++k) sup = std::max(sup, std::abs(rec.at(k, 0) + rest - ref[k]));
  const bool shape_ok = ref.size() == rec.rows();

  const Network net(c, params);
  auto state = resting_network_state(net);
  const double v0 = state.V(0);
  const std::vector<double> zero(1, 0.0);
  double drift = 0.0;
  for (int k = 0; k < 40000; ++k) {  // 1000 ms
    step_network(net, state, k * cfg.dt, cfg.dt, zero);
    drift = std::max(drift, std::abs(state.V(0) - v0));
  }

  cfg.duration = 1000.0;
  cfg.stimuli[0].offset = cfg.duration;
  const double rate = static_cast<double>(simulate(c, cfg, params).spikes[0].size());
  return {shape_ok && sup <= 1e-3 && drift < 1e-6 && rate >= 50.0 && rate <= 90.0,
          "sup |V - V_ref| " + fmt(sup, 3) + " mV (<= 1e-3); rest drift " + fmt(drift, 3) + " mV (< 1e-6); 10 uA rate " +
              fmt(rate) + " Hz (in [50, 90])"};
}

// ---- criterion 7: sampling goodness of fit --------------------------------

struct Fit {
  double statistic = 0.0;
  int dof = 0;
  double p = 1.0;
};

// Pearson chi-square of observed counts against expected ones, cells with
// zero expectation must stay empty.
Fit chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
  Fit f;
  int support = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (expected[k] == 0.0) {
      if (observed[k] != 0.0) f.p = 0.0;
      continue;
    }
    ++support;
    f.statistic += (observed[k] - expected[k]) * (observed[k] - expected[k]) / expected[k];
  }
  f.dof = support - 1;
  if (f.dof > 0 && f.p > 0.0) f.p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(f.dof), f.statistic));
  return f;
}

Outcome criterion7(const Context&) {
  constexpr std::size_t kDraws = 10000;
  constexpr double kAlpha = 0.001;
  SpatialDomain d;
  d.lower = {0.0, 0.0, 0.0};
  d.upper = {4.0, 2.0, 0.0};
  d.resolution = {10, 5, 1};
  const std::size_t L = d.lattice_size();

  std::map<std::string, std::vector<double>> fields;
  fields["uniform"] = std::vector<double>(L, 1.0);
  auto& ramp = fields["ramp"];
  for (std::size_t y = 0; y < L; ++y) ramp.push_back(d.cell_center(y)[0]);
  auto& spike = fields["spike"];
  spike.assign(L, 0.0);
  spike[17] = 1.0;
  for (auto& [name, f] : fields) {
    double mass = 0.0;
    for (double v : f) mass += v * d.cell_volume();
    for (double& v : f) v /= mass;
  }

  bool ok = true;
  std::string detail;
  std::uint64_t seed = 11;
  for (const auto& [name, f] : fields) {
    const auto pts = sample_positions(d, f, kDraws, seed++);
    std::vector<double> obs(L, 0.0), expect(L);
    for (const auto& p : pts) obs[d.cell_of(p)] += 1.0;
    for (std::size_t y = 0; y < L; ++y) expect[y] = f[y] * d.cell_volume() * kDraws;
    const auto fit = chi_square(obs, expect);
    // The point mass has one supported cell; test uniformity inside it on a
    // 4 x 4 sub-lattice instead.
    Fit inner;
    if (name == "spike") {
      const auto lo = d.cell_center(17);
      const auto h = d.cell_extent();
      std::vector<double> sub(16, 0.0);
      for (const auto& p : pts) {
        const int ix = std::clamp(static_cast<int>((p[0] - (lo[0] - h[0] / 2)) / h[0] * 4), 0, 3);
        const int iy = std::clamp(static_cast<int>((p[1] - (lo[1] - h[1] / 2)) / h[1] * 4), 0, 3);
        sub[ix * 4 + iy] += 1.0;
      }
      inner = chi_square(sub, std::vector<double>(16, kDraws / 16.0));
    }
    const bool pass = fit.p >= kAlpha && inner.p >= kAlpha;
    ok = ok && pass;
    detail += (detail.empty() ? "" : "; ") + name + " p = " + fmt(name == "spike" ? inner.p : fit.p, 3) +
              (name == "spike" ? " (sub-cell, all draws in the cell: " + std::string(fit.p > 0 ? "yes" : "no") + ")" : "");
  }
  return {ok, "10000 draws, alpha 0.001: " + detail};
}

// ---- criterion 8: signal chain --------------------------------------------

Outcome criterion8(const Context&) {
  const auto tone = [](double f, double fs, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = std::sin(2 * std::numbers::pi * f * k / fs);
    return x;
  };
  const auto mid_peak = [](const std::vector<double>& x) {
    double m = 0.0;
    for (std::size_t k = x.size() / 4; k < 3 * x.size() / 4; ++k) m = std::max(m, std::abs(x[k]));
    return m;
  };
  const double fs = 10000.0;
  const double pass50 = mid_peak(lowpass(tone(50.0, fs, 20000), fs, 300.0));
  const double stop1k = 20.0 * std::log10(mid_peak(lowpass(tone(1000.0, fs, 20000), fs, 300.0)));
  const auto spec = periodogram(tone(50.0, 1000.0, 4000), 1000.0);
  const double bin = spec.frequencies[1] - spec.frequencies[0];
  const double peak = dominant_frequency(spec, 1.0, 300.0);
  const bool ok = std::abs(pass50 - 1.0) <= 0.01 && stop1k <= -40.0 && std::abs(peak - 50.0) <= bin;
  return {ok, "50 Hz gain " + fmt(pass50, 6) + " (within 1%); 1 kHz " + fmt(stop1k) + " dB (<= -40); tone peak " +
                  fmt(peak) + " Hz (bin " + fmt(bin) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  ctx.work = fs::temp_directory_path() / "ncell_acceptance";
  std::set<int> wanted;
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    if (a == "--ncell" && k + 1 < argc) {
      ctx.ncell = argv[++k];
    } else if (a == "--work" && k + 1 < argc) {
      ctx.work = argv[++k];
    } else {
      wanted.insert(std::stoi(a));
    }
  }
  if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7, 8};
  if (ctx.ncell.empty() && (wanted.count(1) || wanted.count(2) || wanted.count(6))) {
    std::cerr << "criteria 1, 2 and 6 need --ncell <path>\n";
    return 2;
  }
  fs::create_directories(ctx.work);

  const std::map<int, std::pair<const char*, Outcome (*)(const Context&)>> criteria = {
      {1, {"striatum oscillation band", criterion1}}, {2, {"radial propagation", criterion2}},
      {3, {"averaging oracle equivalence", criterion3}}, {4, {"averaging algebra", criterion4}},
      {5, {"HH correctness", criterion5}},            {6, {"determinism across thread counts", criterion6}},
      {7, {"sampling distribution fidelity", criterion7}}, {8, {"signal chain", criterion8}},
  };
  int failed = 0;
  for (int id : wanted) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) continue;
    Outcome o;
    try {
      o = it->second.second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << it->second.first << "): " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
