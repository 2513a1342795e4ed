#pragma once

// Shared test helpers: a random compartment generator and an independent
// scalar Hodgkin-Huxley integrator used as the reference for the network
// kernel. Nothing here calls into the library's HH code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "ncell/builder.hpp"
#include "ncell/dynamics.hpp"

namespace testing {

struct RandomShape {
  int max_ncells = 5;
  int max_neurons = 50;
  int max_resolution = 16;
  bool allow_3d = true;
};

// Valid random compartment. g kind is picked by `g_kind` (0 sum, 1 max,
// 2 const) so callers can cycle through all three.
inline ncell::CompartmentDescription random_description(std::uint64_t seed, int g_kind,
                                                        const RandomShape& shape = {}) {
  std::mt19937_64 rng(seed);
  const auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  ncell::CompartmentDescription d;
  d.domain.dimension = shape.allow_3d && pick(0, 3) == 0 ? 3 : 2;
  const int max_res = d.domain.dimension == 3 ? std::min(shape.max_resolution, 6) : shape.max_resolution;
  for (int a = 0; a < 3; ++a) {
    if (a < d.domain.dimension) {
      d.domain.lower[a] = uni(-1.0, 1.0);
      d.domain.upper[a] = d.domain.lower[a] + uni(2.0, 4.0);
      d.domain.resolution[a] = pick(2, max_res);
    } else {
      d.domain.lower[a] = d.domain.upper[a] = 0.0;
      d.domain.resolution[a] = 1;
    }
  }
  const std::size_t lattice = d.domain.lattice_size();
  const double cell = d.domain.cell_volume();

  const int classes = pick(1, 3);
  for (int z = 0; z < classes; ++z) {
    ncell::NeurotransmitterClass cls;
    cls.id = z;
    cls.label = "c" + std::to_string(z);
    cls.synaptic_reversal_mV = pick(0, 1) ? 0.0 : -80.0;
    d.classes.push_back(cls);
    std::vector<double> rho(lattice);
    double mass = 0.0;
    for (auto& v : rho) mass += (v = uni(0.2, 1.0));
    for (auto& v : rho) v /= mass * cell;
    d.rho[z] = rho;
  }

  const int ncells = pick(1, shape.max_ncells);
  const int neurons = pick(ncells, shape.max_neurons);
  std::vector<int> per_cell(ncells, 1);
  for (int k = ncells; k < neurons; ++k) ++per_cell[pick(0, ncells - 1)];

  int next_id = pick(0, 5);
  for (int i = 0; i < ncells; ++i) {
    ncell::NCellDescription nc;
    nc.id = 10 * i + pick(0, 9);
    for (int k = 0; k < per_cell[i]; ++k) {
      ncell::NodeDescription node;
      node.neuron_id = next_id;
      next_id += pick(1, 3);
      node.class_id = pick(0, classes - 1);
      node.psi = k == 0 ? uni(0.1, 2.0) : (pick(0, 4) == 0 ? 0.0 : uni(0.0, 2.0));
      if (pick(0, 1)) {
        ncell::Position p{0.0, 0.0, 0.0};
        for (int a = 0; a < d.domain.dimension; ++a) p[a] = uni(d.domain.lower[a], d.domain.upper[a]);
        node.position = p;
      }
      nc.nodes.push_back(node);
    }
    for (std::size_t a = 0; a + 1 < nc.nodes.size(); ++a) {
      if (pick(0, 2) == 0) nc.synapses.push_back({nc.nodes[a].neuron_id, nc.nodes[a + 1].neuron_id, {}, uni(0.1, 2.0), {}});
    }
    std::vector<double> chi(lattice);
    for (auto& v : chi) v = pick(0, 5) == 0 ? 0.0 : uni(0.0, 1.5);
    d.chi[nc.id] = chi;
    d.ncells.push_back(std::move(nc));
  }
  // Keep g positive somewhere: the first n-cell covers every lattice point.
  for (auto& v : d.chi.begin()->second) v = std::max(v, 0.05);

  d.g.kind = g_kind == 0 ? ncell::GSpec::Kind::Sum : g_kind == 1 ? ncell::GSpec::Kind::Max : ncell::GSpec::Kind::Const;
  d.g.constant = uni(0.5, 2.0);
  d.sampling_seed = seed ^ 0x9e3779b97f4a7c15ULL;
  return d;
}

inline ncell::Compartment random_compartment(std::uint64_t seed, int g_kind, const RandomShape& shape = {}) {
  return ncell::build_compartment(random_description(seed, g_kind, shape));
}

// One class, one n-cell, one neuron at the domain centre, uniform rho.
inline ncell::CompartmentDescription minimal_description() {
  ncell::CompartmentDescription d;
  d.domain.dimension = 2;
  d.domain.lower = {0.0, 0.0, 0.0};
  d.domain.upper = {2.0, 2.0, 0.0};
  d.domain.resolution = {4, 4, 1};
  d.classes.push_back({0, "exc", 0.0, false});
  d.rho[0] = std::vector<double>(16, 0.25);
  d.chi[0] = std::vector<double>(16, 1.0);
  ncell::NCellDescription nc;
  nc.id = 0;
  nc.nodes.push_back({0, 0, ncell::Position{1.0, 1.0, 0.0}, 1.0});
  d.ncells.push_back(nc);
  d.g.kind = ncell::GSpec::Kind::Const;
  d.g.constant = 1.0;
  return d;
}

// ---- scalar Hodgkin-Huxley reference --------------------------------------
// Textbook rate functions written directly with exp/expm1, classic RK4.

struct HHRef {
  double C_m = 1.0, g_Na = 120.0, g_K = 36.0, g_L = 0.3;
  double E_Na = 50.0, E_K = -77.0, E_L = -54.4;

  static double alpha_m(double V) {
    const double x = V + 40.0;
    return x == 0.0 ? 1.0 : 0.1 * x / -std::expm1(-x / 10.0);
  }
  static double beta_m(double V) { return 4.0 * std::exp(-(V + 65.0) / 18.0); }
  static double alpha_h(double V) { return 0.07 * std::exp(-(V + 65.0) / 20.0); }
  static double beta_h(double V) { return 1.0 / (1.0 + std::exp(-(V + 35.0) / 10.0)); }
  static double alpha_n(double V) {
    const double x = V + 55.0;
    return x == 0.0 ? 0.1 : 0.01 * x / -std::expm1(-x / 10.0);
  }
  static double beta_n(double V) { return 0.125 * std::exp(-(V + 65.0) / 80.0); }

  struct State {
    double V, m, h, n;
  };

  State deriv(const State& s, double I) const {
    const double I_ion = g_Na * s.m * s.m * s.m * s.h * (s.V - E_Na) + g_K * std::pow(s.n, 4) * (s.V - E_K) +
                         g_L * (s.V - E_L);
    return {(I - I_ion) / C_m, alpha_m(s.V) * (1 - s.m) - beta_m(s.V) * s.m,
            alpha_h(s.V) * (1 - s.h) - beta_h(s.V) * s.h, alpha_n(s.V) * (1 - s.n) - beta_n(s.V) * s.n};
  }

  State steady(double V) const {
    return {V, alpha_m(V) / (alpha_m(V) + beta_m(V)), alpha_h(V) / (alpha_h(V) + beta_h(V)),
            alpha_n(V) / (alpha_n(V) + beta_n(V))};
  }

  // Bisection on the steady-state current; the squid membrane has a single
  // root near -65 mV.
  State rest() const {
    const auto f = [&](double V) { return deriv(steady(V), 0.0).V; };
    double lo = -90.0, hi = -50.0;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      (f(lo) > 0) == (f(mid) > 0) ? lo = mid : hi = mid;
    }
    return steady(0.5 * (lo + hi));
  }

  State rk4(const State& s, double I, double dt) const {
    const auto add = [](const State& a, const State& b, double k) {
      return State{a.V + k * b.V, a.m + k * b.m, a.h + k * b.h, a.n + k * b.n};
    };
    const State k1 = deriv(s, I);
    const State k2 = deriv(add(s, k1, dt / 2), I);
    const State k3 = deriv(add(s, k2, dt / 2), I);
    const State k4 = deriv(add(s, k3, dt), I);
    return {s.V + dt / 6 * (k1.V + 2 * k2.V + 2 * k3.V + k4.V), s.m + dt / 6 * (k1.m + 2 * k2.m + 2 * k3.m + k4.m),
            s.h + dt / 6 * (k1.h + 2 * k2.h + 2 * k3.h + k4.h), s.n + dt / 6 * (k1.n + 2 * k2.n + 2 * k3.n + k4.n)};
  }

  // V sampled after every step (index 0 = initial state).
  std::vector<double> trace(double I, double dt, double T) const {
    State s = rest();
    const auto steps = static_cast<long>(std::llround(T / dt));
    std::vector<double> out{s.V};
    for (long k = 0; k < steps; ++k) out.push_back((s = rk4(s, I, dt)).V);
    return out;
  }

  // Upward 0 mV crossings per second between t0 and t1.
  double rate_hz(double I, double dt, double t0, double t1) const {
    const auto v = trace(I, dt, t1);
    int count = 0;
    for (std::size_t k = 1; k < v.size(); ++k) {
      const double t = static_cast<double>(k) * dt;
      if (t > t0 && v[k - 1] < 0.0 && v[k] >= 0.0) ++count;
    }
    return count / ((t1 - t0) / 1000.0);
  }
};

// Fresh scratch directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("ncell_test_" + name + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
