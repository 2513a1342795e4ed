#include <cmath>

#include "doctest.h"
#include "ncell/error.hpp"
#include "ncell/striatum.hpp"

using namespace ncell;
using namespace ncell::striatum;

namespace {

const StriatumModel& default_model() {
  static const StriatumModel m = build_striatum_model(StriatumParams{});
  return m;
}

}  // namespace

TEST_CASE("default population") {
  const auto& m = default_model();
  CHECK(m.compartment.neuron_count() == 6400);
  const auto counts = population_counts(StriatumParams{});
  CHECK(counts[0] == 3072);
  CHECK(counts[1] == 3072);
  CHECK(counts[2] == 64);
  CHECK(counts[3] == 96);
  CHECK(counts[4] == 96);
  CHECK(counts[0] + counts[1] == 6144);  // 96% spiny
  std::array<int, kPopulations> seen{};
  for (auto p : m.population) ++seen[static_cast<std::size_t>(p)];
  CHECK(seen == counts);
  CHECK(validate_compartment(m.compartment).empty());
}

TEST_CASE("largest-remainder rounding sums to the total") {
  for (int total : {4, 7, 99, 400, 401, 1234}) {
    StriatumParams p;
    p.total_neurons = total;
    int s = 0;
    for (int c : population_counts(p)) s += c;
    CHECK(s == total);
  }
}

TEST_CASE("parameter errors") {
  StriatumParams p;
  p.fractions = {0.4, 0.4, 0.05, 0.025, 0.025};
  try {
    check_params(p);
    FAIL("expected InvalidFractions");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidFractions);
  }
  StriatumParams q;
  q.edges[{Population::St3, Population::St2}] = EdgeRule{};
  try {
    check_params(q);
    FAIL("expected ForbiddenEdge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ForbiddenEdge);
  }
}

TEST_CASE("every synapse is a microcircuit edge with its sign and transmitter") {
  const auto& m = default_model();
  const auto& c = m.compartment;
  std::size_t edges = 0;
  for (const auto& cell : c.ncells) {
    for (const auto& s : cell.synapses) {
      const auto pre = m.population[c.neuron_index(s.pre)];
      const auto post = m.population[c.neuron_index(s.post)];
      const auto sign = edge_sign(pre, post);
      REQUIRE(sign.has_value());
      CHECK(s.sign == *sign);
      CHECK(s.receptor_class == static_cast<int>(transmitter_of(pre)));
      CHECK(c.neurons[c.neuron_index(s.pre)].ncell_id == cell.id);
      ++edges;
    }
  }
  CHECK(edges > 0);
}

TEST_CASE("connection counts match the Bernoulli expectation within 3 sigma") {
  StriatumParams p;
  p.total_neurons = 1600;
  const auto m = build_striatum_model(p);
  const auto& c = m.compartment;
  const int side = p.resolved_grid_side(), block = p.resolved_block_side();
  const int blocks = (side + block - 1) / block;

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(blocks * blocks));
  for (std::size_t k = 0; k < c.neurons.size(); ++k) members[c.neurons[k].ncell_id].push_back(k);

  double expect[2] = {}, var[2] = {};
  for (int b = 0; b < blocks * blocks; ++b) {
    for (int t = 0; t < blocks * blocks; ++t) {
      const int manhattan = std::abs(b / blocks - t / blocks) + std::abs(b % blocks - t % blocks);
      if (manhattan > 1) continue;
      for (auto i : members[b]) {
        for (auto j : members[t]) {
          if (i == j || !edge_sign(m.population[i], m.population[j])) continue;
          const auto r = p.effective_rule(m.population[i], m.population[j]);
          const double q = manhattan == 0 ? r.p_within : r.p_adjacent;
          expect[manhattan] += q;
          var[manhattan] += q * (1 - q);
        }
      }
    }
  }
  double seen[2] = {};
  for (const auto& cell : c.ncells) {
    for (const auto& s : cell.synapses) {
      const int a = c.neurons[c.neuron_index(s.pre)].ncell_id, b = c.neurons[c.neuron_index(s.post)].ncell_id;
      const int manhattan = std::abs(a / blocks - b / blocks) + std::abs(a % blocks - b % blocks);
      REQUIRE(manhattan <= 1);
      seen[manhattan] += 1;
    }
  }
  for (int k = 0; k < 2; ++k) {
    INFO("adjacency " << k << " expected " << expect[k] << " seen " << seen[k]);
    CHECK(std::abs(seen[k] - expect[k]) < 3.0 * std::sqrt(var[k]));
  }
}

TEST_CASE("tile scaling keeps the reference in-degree") {
  StriatumParams p;
  p.total_neurons = 400;
  CHECK(p.resolved_block_side() == 3);
  const auto r = p.effective_rule(Population::St1A, Population::St1B);
  CHECK(r.p_within == doctest::Approx(0.1 * 64.0 / 9.0));
  CHECK(r.p_adjacent == doctest::Approx(0.02 * 64.0 / 9.0));
  CHECK(StriatumParams{}.resolved_block_side() == 8);
  CHECK(StriatumParams{}.effective_rule(Population::St1A, Population::St1B).p_within == doctest::Approx(0.1));
}

TEST_CASE("structure is a function of the seed") {
  StriatumParams p;
  p.total_neurons = 400;
  const auto a = structure_checksum(build_striatum(p));
  CHECK(a == structure_checksum(build_striatum(p)));
  p.seed = 2;
  CHECK(a != structure_checksum(build_striatum(p)));
}

TEST_CASE("demo stimulus targets one central cholinergic neuron") {
  const auto& m = default_model();
  const auto s = demo_stimulus(m.compartment, 2000.0);
  REQUIRE(s.target.ids.size() == 1);
  const auto k = static_cast<std::size_t>(m.compartment.neuron_index(s.target.ids[0]));
  CHECK(m.population[k] == Population::St4);
  CHECK(s.amplitude == 10.0);
  CHECK(s.onset == 0.0);
  CHECK(s.offset == 2000.0);
  // Nearest St4 to the centre.
  const auto& pos = m.compartment.neurons[k].position;
  const double d0 = std::hypot(pos[0] - 40.0, pos[1] - 40.0);
  for (std::size_t i = 0; i < m.population.size(); ++i) {
    if (m.population[i] != Population::St4) continue;
    const auto& q = m.compartment.neurons[i].position;
    CHECK(std::hypot(q[0] - 40.0, q[1] - 40.0) >= d0);
  }
}
