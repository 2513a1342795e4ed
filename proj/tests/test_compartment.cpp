#include <cmath>
#include <functional>

#include "doctest.h"
#include "ncell/builder.hpp"
#include "ncell/error.hpp"
#include "ncell/sampling.hpp"
#include "support.hpp"

using namespace ncell;

namespace {

bool has_rule(const ValidationReport& r, const std::string& rule) {
  for (const auto& v : r)
    if (v.rule == rule) return true;
  return false;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ncell::Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("minimal spec builds a one-neuron compartment") {
  const auto c = build_compartment(testing::minimal_description());
  CHECK(c.neuron_count() == 1);
  CHECK(c.ncells.size() == 1);
  CHECK(validate_compartment(c).empty());
}

TEST_CASE("builder reference errors") {
  SUBCASE("missing post neuron") {
    auto d = testing::minimal_description();
    d.ncells[0].synapses.push_back({0, 99, {}, 1.0, {}});
    CHECK(code_of([&] { assemble_compartment(d); }) == ErrorCode::UnresolvedReference);
  }
  SUBCASE("duplicate neuron") {
    auto d = testing::minimal_description();
    d.ncells[0].nodes.push_back(d.ncells[0].nodes[0]);
    CHECK(code_of([&] { assemble_compartment(d); }) == ErrorCode::DuplicateId);
  }
  SUBCASE("no n-cells") {
    auto d = testing::minimal_description();
    d.ncells.clear();
    d.chi.clear();
    CHECK(code_of([&] { assemble_compartment(d); }) == ErrorCode::DomainEmpty);
  }
}

TEST_CASE("validation reports measured values") {
  SUBCASE("rho scaled by two") {
    auto d = testing::minimal_description();
    for (auto& v : d.rho[0]) v *= 2.0;
    const auto c = assemble_compartment(d);
    const auto r = validate_compartment(c);
    REQUIRE(has_rule(r, "rho-normalization"));
    for (const auto& v : r)
      if (v.rule == "rho-normalization") CHECK(v.measured == doctest::Approx(2.0));
    CHECK(code_of([&] { build_compartment(d); }) == ErrorCode::InvalidCompartment);
  }
  SUBCASE("chi zero under sum") {
    auto d = testing::minimal_description();
    d.g.kind = GSpec::Kind::Sum;
    for (auto& v : d.chi[0]) v = 0.0;
    CHECK(has_rule(validate_compartment(assemble_compartment(d)), "g-positivity"));
  }
  SUBCASE("psi all zero") {
    auto d = testing::minimal_description();
    d.ncells[0].nodes[0].psi = 0.0;
    CHECK(has_rule(validate_compartment(assemble_compartment(d)), "psi-support"));
  }
  SUBCASE("self synapse") {
    auto d = testing::minimal_description();
    d.ncells[0].synapses.push_back({0, 0, {}, 1.0, {}});
    CHECK(has_rule(validate_compartment(assemble_compartment(d)), "synapse-self"));
  }
  SUBCASE("position outside") {
    auto d = testing::minimal_description();
    d.ncells[0].nodes[0].position = Position{3.0, 1.0, 0.0};
    CHECK(has_rule(validate_compartment(assemble_compartment(d)), "neuron-position"));
  }
}

TEST_CASE("random compartments are valid and deterministic") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto a = testing::random_compartment(seed, static_cast<int>(seed % 3));
    const auto b = testing::random_compartment(seed, static_cast<int>(seed % 3));
    CHECK(validate_compartment(a).empty());
    CHECK(structure_checksum(a) == structure_checksum(b));
  }
  CHECK(structure_checksum(testing::random_compartment(1, 0)) != structure_checksum(testing::random_compartment(2, 0)));
}

TEST_CASE("lattice geometry") {
  SpatialDomain d;
  d.lower = {0.0, 0.0, 0.0};
  d.upper = {2.0, 1.0, 0.0};
  d.resolution = {4, 2, 1};
  CHECK(d.lattice_size() == 8);
  CHECK(d.cell_volume() == doctest::Approx(0.25));
  // Row-major, last axis fastest.
  const auto p = d.cell_center(3);
  CHECK(p[0] == doctest::Approx(0.75));
  CHECK(p[1] == doctest::Approx(0.75));
  CHECK(d.cell_of(p) == 3);
  CHECK(d.cell_of({2.0, 1.0, 0.0}) == 7);
}

TEST_CASE("sample_positions") {
  SpatialDomain d;
  d.lower = {0.0, 0.0, 0.0};
  d.upper = {2.0, 2.0, 0.0};
  d.resolution = {8, 8, 1};
  const std::vector<double> uniform(64, 0.25);

  SUBCASE("empty request") { CHECK(sample_positions(d, uniform, 0, 1).empty()); }

  SUBCASE("bit-identical per seed") {
    const auto a = sample_positions(d, uniform, 500, 7);
    const auto b = sample_positions(d, uniform, 500, 7);
    CHECK(a == b);
    CHECK(a != sample_positions(d, uniform, 500, 8));
  }

  SUBCASE("point mass stays inside its cell") {
    std::vector<double> spike(64, 0.0);
    spike[19] = 1.0 / d.cell_volume();
    for (const auto& p : sample_positions(d, spike, 1000, 3)) CHECK(d.cell_of(p) == 19);
  }

  SUBCASE("quadrant counts within 4 sigma") {
    const std::size_t n = 10000;
    int quad[4] = {};
    for (const auto& p : sample_positions(d, uniform, n, 1)) ++quad[(p[0] >= 1.0) * 2 + (p[1] >= 1.0)];
    const double mean = n / 4.0, sigma = std::sqrt(n * 0.25 * 0.75);
    for (int q : quad) CHECK(std::abs(q - mean) < 4.0 * sigma);
  }

  SUBCASE("zero density is rejected") {
    CHECK(code_of([&] { sample_positions(d, std::vector<double>(64, 0.0), 10, 1); }) == ErrorCode::ZeroDensity);
  }
}
