#include "ncell/striatum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ncell/builder.hpp"
#include "ncell/error.hpp"
#include "ncell/sampling.hpp"

namespace ncell::striatum {
namespace {

constexpr std::array<Population, kPopulations> kAll{Population::St1A, Population::St1B, Population::St2,
                                                    Population::St3, Population::St4};

std::size_t idx(Population p) { return static_cast<std::size_t>(p); }

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform density times (1 + amplitude * s(y)), s a smooth random field of a
// few low-frequency cosines scaled to max |s| = 1; normalised to unit mass.
std::vector<double> perturbed_density(const SpatialDomain& d, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr int kModes = 4;
  struct Mode {
    double kx, ky, phase, amp;
  };
  std::vector<Mode> modes;
  const double lx = d.upper[0] - d.lower[0];
  const double ly = d.upper[1] - d.lower[1];
  for (int m = 0; m < kModes; ++m) {
    const double cx = std::floor(unit_uniform(rng) * 3.0) + 1.0 * (m % 2);
    const double cy = std::floor(unit_uniform(rng) * 3.0) + 1.0 * ((m + 1) % 2);
    modes.push_back({2.0 * std::numbers::pi * cx / lx, 2.0 * std::numbers::pi * cy / ly,
                     2.0 * std::numbers::pi * unit_uniform(rng), 0.5 + unit_uniform(rng)});
  }
  const std::size_t n = d.lattice_size();
  std::vector<double> s(n);
  double smax = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    const auto p = d.cell_center(y);
    double v = 0.0;
    for (const auto& m : modes) v += m.amp * std::cos(m.kx * p[0] + m.ky * p[1] + m.phase);
    s[y] = v;
    smax = std::max(smax, std::abs(v));
  }
  std::vector<double> rho(n);
  double mass = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    rho[y] = 1.0 + amplitude * (smax > 0.0 ? s[y] / smax : 0.0);
    mass += rho[y];
  }
  const double scale = 1.0 / (mass * d.cell_volume());
  for (double& v : rho) v *= scale;
  return rho;
}

}  // namespace

const char* to_string(Population p) {
  switch (p) {
    case Population::St1A: return "St1A";
    case Population::St1B: return "St1B";
    case Population::St2: return "St2";
    case Population::St3: return "St3";
    case Population::St4: return "St4";
  }
  return "?";
}

Population parse_population(const std::string& name) {
  for (auto p : kAll) {
    if (name == to_string(p)) return p;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown striatal population '" + name + "'");
}

Transmitter transmitter_of(Population p) {
  switch (p) {
    case Population::St2: return Transmitter::DA;
    case Population::St4: return Transmitter::ACh;
    default: return Transmitter::GABA;
  }
}

const std::vector<EdgeType>& microcircuit_edges() {
  using P = Population;
  static const std::vector<EdgeType> kEdges = {
      // cholinergic: inhibits the direct pathway, disinhibits the indirect one
      {P::St4, P::St1A, -1},
      {P::St4, P::St1B, +1},
      {P::St4, P::St2, +1},
      // GABAergic interneurons onto spiny and cholinergic cells
      {P::St3, P::St1A, -1},
      {P::St3, P::St1B, -1},
      {P::St3, P::St4, -1},
      // dopamine: D1 (St1A) excited, D2 (St1B) inhibited
      {P::St2, P::St1A, +1},
      {P::St2, P::St1B, -1},
      // spiny collaterals
      {P::St1A, P::St1A, -1},
      {P::St1A, P::St1B, -1},
      {P::St1B, P::St1A, -1},
      {P::St1B, P::St1B, -1},
  };
  return kEdges;
}

std::optional<int> edge_sign(Population pre, Population post) {
  for (const auto& e : microcircuit_edges()) {
    if (e.pre == pre && e.post == post) return e.sign;
  }
  return std::nullopt;
}

int StriatumParams::resolved_grid_side() const {
  if (grid_side > 0) return grid_side;
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(std::max(total_neurons, 0)))));
}

int StriatumParams::resolved_block_side() const {
  if (block_side > 0) return block_side;
  return std::max(3, static_cast<int>(std::lround(resolved_grid_side() / 10.0)));
}

EdgeRule StriatumParams::effective_rule(Population pre, Population post) const {
  auto r = rule(pre, post);
  const double b = resolved_block_side();
  const double scale = static_cast<double>(kReferenceBlockSide * kReferenceBlockSide) / (b * b);
  r.p_within = std::min(1.0, r.p_within * scale);
  r.p_adjacent = std::min(1.0, r.p_adjacent * scale);
  return r;
}

EdgeRule StriatumParams::rule(Population pre, Population post) const {
  if (edges.empty()) return EdgeRule{};
  const auto it = edges.find({pre, post});
  if (it == edges.end()) return EdgeRule{0.0, 0.0, 0.0};
  return it->second;
}

void check_params(const StriatumParams& p) {
  double sum = 0.0;
  for (double f : p.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorCode::InvalidFractions, "population fractions must lie in [0, 1]");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidFractions, "population fractions sum to " + std::to_string(sum) + ", not 1");
  }
  for (const auto& [key, rule] : p.edges) {
    if (!edge_sign(key.first, key.second)) {
      throw Error(ErrorCode::ForbiddenEdge, std::string(to_string(key.first)) + " -> " + to_string(key.second) +
                                                " is not a projection of the striatal microcircuit");
    }
    for (double q : {rule.p_within, rule.p_adjacent}) {
      if (!(q >= 0.0 && q <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "connection probabilities must lie in [0, 1]");
      }
    }
    if (!(rule.weight >= 0.0)) throw Error(ErrorCode::InvalidConfig, "edge weights must be >= 0");
  }
  if (p.total_neurons < 1) throw Error(ErrorCode::InvalidConfig, "total_neurons must be positive");
  if (p.resolved_grid_side() < 2) throw Error(ErrorCode::InvalidConfig, "grid side must be >= 2");
  if (p.block_side < 0) throw Error(ErrorCode::InvalidConfig, "block side must be >= 1 (or 0 for automatic)");
  if (!(p.gaba_tau_rise_ms > 0.0) || p.gaba_tau_rise_ms == SynapseParameters{}.tau_decay) {
    throw Error(ErrorCode::InvalidConfig, "GABA rise time must be positive and differ from the decay time");
  }
  if (!(p.rho_perturbation >= 0.0 && p.rho_perturbation < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "rho perturbation must lie in [0, 1)");
  }
}

std::array<int, kPopulations> population_counts(const StriatumParams& p) {
  check_params(p);
  std::array<int, kPopulations> counts{};
  std::array<double, kPopulations> remainder{};
  int assigned = 0;
  for (std::size_t k = 0; k < kPopulations; ++k) {
    const double exact = p.fractions[k] * p.total_neurons;
    counts[k] = static_cast<int>(std::floor(exact));
    remainder[k] = exact - counts[k];
    assigned += counts[k];
  }
  std::array<std::size_t, kPopulations> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < p.total_neurons; ++k, ++assigned) ++counts[order[k % kPopulations]];
  return counts;
}

ModelParameters striatum_dynamics(const StriatumParams& p) {
  auto m = ModelParameters::defaults(3);
  m.per_class[0].hh.E_L += p.spiny_leak_shift_mV;
  m.per_class[0].synapse.g_peak_scale = p.gaba_g_peak;
  m.per_class[0].synapse.tau_rise = p.gaba_tau_rise_ms;
  m.per_class[1].synapse.g_peak_scale = p.da_g_peak;
  m.per_class[2].synapse.g_peak_scale = p.ach_g_peak;
  return m;
}

StriatumModel build_striatum_model(const StriatumParams& p) {
  const auto counts = population_counts(p);
  const int side = p.resolved_grid_side();
  const int block = p.resolved_block_side();
  const int blocks = (side + block - 1) / block;

  CompartmentDescription desc;
  desc.domain.dimension = 2;
  desc.domain.lower = {0.0, 0.0, 0.0};
  desc.domain.upper = {static_cast<double>(side), static_cast<double>(side), 0.0};
  desc.domain.resolution = {side, side, 1};
  desc.classes = {{0, "GABA", -80.0, false}, {1, "DA", 0.0, true}, {2, "ACh", 0.0, true}};
  desc.g.kind = GSpec::Kind::Sum;
  desc.cross_cell_edges = true;
  desc.sampling_seed = p.seed;

  for (int z = 0; z < 3; ++z) {
    desc.rho[z] = perturbed_density(desc.domain, p.rho_perturbation, mix_seed(p.seed, 100 + z));
  }

  // Sample every population from its transmitter's density, then tile.
  struct Placed {
    Population pop;
    Position pos;
    int block;
  };
  std::vector<Placed> placed;
  for (auto pop : kAll) {
    const auto z = static_cast<int>(transmitter_of(pop));
    const auto pos = sample_positions(desc.domain, desc.rho[z], static_cast<std::size_t>(counts[idx(pop)]),
                                      mix_seed(p.seed, 200 + idx(pop)));
    for (const auto& q : pos) {
      const int bx = std::min(static_cast<int>(q[0]) / block, blocks - 1);
      const int by = std::min(static_cast<int>(q[1]) / block, blocks - 1);
      placed.push_back({pop, q, bx * blocks + by});
    }
  }
  std::stable_sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) {
    return a.block != b.block ? a.block < b.block : idx(a.pop) < idx(b.pop);
  });

  const int cells = blocks * blocks;
  desc.ncells.resize(cells);
  std::vector<std::vector<std::size_t>> members(cells);
  std::vector<Population> population(placed.size());
  for (int b = 0; b < cells; ++b) desc.ncells[b].id = b;
  for (std::size_t k = 0; k < placed.size(); ++k) {
    NodeDescription node;
    node.neuron_id = static_cast<int>(k);
    node.class_id = static_cast<int>(transmitter_of(placed[k].pop));
    node.position = placed[k].pos;
    node.psi = 1.0;
    desc.ncells[placed[k].block].nodes.push_back(node);
    members[placed[k].block].push_back(k);
    population[k] = placed[k].pop;
  }

  // Pairwise Bernoulli draws in a fixed (pre block, pre, post block, post) order.
  std::mt19937_64 rng(mix_seed(p.seed, 300));
  for (int b = 0; b < cells; ++b) {
    const int bx = b / blocks, by = b % blocks;
    std::vector<std::pair<int, bool>> targets{{b, true}};
    const int dx[] = {-1, 1, 0, 0};
    const int dy[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int nx = bx + dx[k], ny = by + dy[k];
      if (nx >= 0 && nx < blocks && ny >= 0 && ny < blocks) targets.push_back({nx * blocks + ny, false});
    }
    std::sort(targets.begin(), targets.end());
    for (auto pre : members[b]) {
      for (const auto& [tb, same] : targets) {
        for (auto post : members[tb]) {
          if (post == pre) continue;
          const auto sign = edge_sign(population[pre], population[post]);
          if (!sign) continue;
          const auto r = p.effective_rule(population[pre], population[post]);
          const double prob = same ? r.p_within : r.p_adjacent;
          if (prob <= 0.0 || unit_uniform(rng) >= prob) continue;
          SynapseDescription s;
          s.pre = static_cast<int>(pre);
          s.post = static_cast<int>(post);
          s.receptor_class = static_cast<int>(transmitter_of(population[pre]));
          s.weight = r.weight;
          s.sign = *sign;
          desc.ncells[b].synapses.push_back(s);
        }
      }
    }
  }

  // chi_i: indicator of tile i grown by one lattice cell on every side.
  const std::size_t lattice = desc.domain.lattice_size();
  for (int b = 0; b < cells; ++b) {
    if (desc.ncells[b].nodes.empty()) continue;
    const int x0 = (b / blocks) * block - 1, x1 = (b / blocks + 1) * block + 1;
    const int y0 = (b % blocks) * block - 1, y1 = (b % blocks + 1) * block + 1;
    std::vector<double> chi(lattice, 0.0);
    for (std::size_t y = 0; y < lattice; ++y) {
      const auto c = desc.domain.cell_coords(y);
      if (c[0] >= x0 && c[0] < x1 && c[1] >= y0 && c[1] < y1) chi[y] = 1.0;
    }
    desc.chi[b] = std::move(chi);
  }

  // A sparse grid can leave a tile without neurons; it is not an n-cell.
  std::erase_if(desc.ncells, [](const NCellDescription& nc) { return nc.nodes.empty(); });

  StriatumModel model;
  model.compartment = build_compartment(desc);
  model.dynamics = striatum_dynamics(p);
  model.population = std::move(population);
  return model;
}

Compartment build_striatum(const StriatumParams& p) { return build_striatum_model(p).compartment; }

StimulusSpec demo_stimulus(const Compartment& c, double duration_ms, double amplitude) {
  int ach = -1;
  for (const auto& cls : c.classes) {
    if (cls.label == "ACh") ach = cls.id;
  }
  if (ach < 0) throw Error(ErrorCode::UnresolvedReference, "compartment has no ACh class");
  Position centre{0.0, 0.0, 0.0};
  for (int a = 0; a < c.domain.dimension; ++a) centre[a] = 0.5 * (c.domain.lower[a] + c.domain.upper[a]);
  int best = -1;
  double best_d = 0.0;
  for (const auto& n : c.neurons) {
    if (n.class_id != ach) continue;
    double d = 0.0;
    for (int a = 0; a < 3; ++a) d += (n.position[a] - centre[a]) * (n.position[a] - centre[a]);
    if (best < 0 || d < best_d) {
      best = n.id;
      best_d = d;
    }
  }
  if (best < 0) throw Error(ErrorCode::UnresolvedReference, "compartment has no cholinergic neuron");
  StimulusSpec s;
  s.target.kind = NeuronSelector::Kind::Ids;
  s.target.ids = {best};
  s.amplitude = amplitude;
  s.onset = 0.0;
  s.offset = duration_ms;
  return s;
}

}  // namespace ncell::striatum
