#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "ncell/commands.hpp"
#include "ncell/digest.hpp"
#include "ncell/error.hpp"
#include "ncell/grid_file.hpp"
#include "ncell/spec_file.hpp"
#include "ncell/striatum.hpp"
#include "support.hpp"

using namespace ncell;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

ParseError parse_failure(const std::string& text) {
  try {
    parse_compartment_spec(text, "inline.json", ".");
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected ParseError");
  return ParseError("", 0, 0, "");
}

std::string minimal_spec_text() {
  testing::TempDir dir("minspec");
  write_compartment_spec(dir / "m.json", build_compartment(testing::minimal_description()),
                         ModelParameters::defaults(1));
  return slurp(dir / "m.json");
}

}  // namespace

TEST_CASE("spec files round-trip the structure") {
  testing::TempDir dir("roundtrip");
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto c = testing::random_compartment(seed, static_cast<int>(seed % 3));
    auto dyn = ModelParameters::defaults(c.classes.size());
    dyn.per_class[0].hh.E_L = -50.125;
    dyn.per_class[0].synapse.tau_rise = 1.75;
    for (auto storage : {FieldStorage::Inline, FieldStorage::Files}) {
      const auto path = dir / ("s" + std::to_string(seed) + ".json");
      write_compartment_spec(path, c, dyn, storage);
      const auto back = read_compartment_spec(path);
      CHECK(structure_checksum(build_compartment(back.description)) == structure_checksum(c));
      CHECK(back.dynamics.per_class[0].hh.E_L == -50.125);
      CHECK(back.dynamics.per_class[0].synapse.tau_rise == 1.75);
    }
  }
}

TEST_CASE("striatum spec round-trips with file-backed fields") {
  testing::TempDir dir("striatum_spec");
  striatum::StriatumParams p;
  p.total_neurons = 400;
  const auto m = striatum::build_striatum_model(p);
  write_compartment_spec(dir / "st.json", m.compartment, m.dynamics, FieldStorage::Files);
  CHECK(fs::exists(dir / "st.rho.ncg"));
  CHECK(fs::exists(dir / "st.chi.ncg"));
  CHECK(structure_checksum(build_compartment(read_compartment_spec(dir / "st.json").description)) ==
        structure_checksum(m.compartment));
}

TEST_CASE("spec parse errors carry line and column") {
  SUBCASE("syntax") {
    const auto e = parse_failure("{\n  \"domain\": {\n    \"dimension\": 2,,\n");
    CHECK(e.line() == 3);
    CHECK(e.column() > 0);
  }
  SUBCASE("unknown key") {
    auto text = minimal_spec_text();
    const auto at = text.find("\"cross_cell_edges\"");
    text.insert(at, "\"colour\": 1, ");
    const auto e = parse_failure(text);
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
    std::size_t line = 1;
    for (std::size_t k = 0; k < at; ++k) line += text[k] == '\n';
    CHECK(e.line() == line);
  }
  SUBCASE("wrong type") {
    auto text = minimal_spec_text();
    const auto at = text.find("\"dimension\":2");
    text.replace(at, 13, "\"dimension\":\"two\"");
    const auto e = parse_failure(text);
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(e.line() > 0);
  }
}

TEST_CASE("sim config round-trip and validation") {
  SimulationConfig cfg;
  cfg.dt = 0.02;
  cfg.duration = 50.0;
  cfg.seed = 9;
  cfg.record_every = 4;
  StimulusSpec s;
  s.target.kind = NeuronSelector::Kind::ClassLabel;
  s.target.label = "exc";
  s.amplitude = 7.5;
  s.onset = 5.0;
  s.offset = 25.0;
  cfg.stimuli.push_back(s);
  const auto back = parse_sim_config(format_sim_config(cfg), "cfg");
  CHECK(back.dt == cfg.dt);
  CHECK(back.duration == cfg.duration);
  CHECK(back.seed == cfg.seed);
  CHECK(back.record_every == cfg.record_every);
  REQUIRE(back.stimuli.size() == 1);
  CHECK(back.stimuli[0].target.label == "exc");
  CHECK(back.stimuli[0].amplitude == 7.5);
  CHECK_THROWS_AS(parse_sim_config("{\"dt\": 0.025, \"durration\": 5}", "cfg"), ParseError);
}

TEST_CASE("record files") {
  testing::TempDir dir("record");
  SimulationRecord r;
  r.neuron_ids = {2, 5, 11};
  for (int k = 0; k < 6; ++k) {
    r.times.push_back(0.1 * k);
    for (int j = 0; j < 3; ++j) r.u.push_back(std::sin(1.0 + k * 0.7 + j) * 1e3 / 3.0);
  }
  for (auto fmt : {OutputFormat::Csv, OutputFormat::Binary}) {
    const auto path = dir / record_file_name(fmt);
    write_record(path, r, fmt);
    const auto back = read_record(path);
    CHECK(back.neuron_ids == r.neuron_ids);
    CHECK(back.times == r.times);
    CHECK(back.u == r.u);
  }
  // 2-axis grid: 16-byte header.
  CHECK(fs::file_size(dir / "record.ncg") == 16 + 7 * 4 * 8);
  CHECK(slurp(dir / "record.csv").rfind("t_ms,n2,n5,n11\n", 0) == 0);

  write_file(dir / "bad.csv", "t_ms,n1\n0,1\n0.1,abc\n");
  try {
    read_record(dir / "bad.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("grid files") {
  testing::TempDir dir("grid");
  const std::uint32_t ext[] = {2, 3, 4};
  std::vector<double> v(24);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = k * 0.5 - 3.0;
  write_grid(dir / "g.ncg", ext, v);
  const auto g = read_grid(dir / "g.ncg");
  CHECK(g.extents == std::vector<std::uint32_t>{2, 3, 4});
  CHECK(g.values == v);
  write_file(dir / "trunc.ncg", slurp(dir / "g.ncg").substr(0, 40));
  CHECK_THROWS_AS(read_grid(dir / "trunc.ncg"), Error);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("validate command") {
  testing::TempDir dir("validate");
  std::ostringstream out, err;
  write_compartment_spec(dir / "ok.json", build_compartment(testing::minimal_description()),
                         ModelParameters::defaults(1));
  CHECK(cmd_validate(dir / "ok.json", out, err) == 0);
  CHECK(out.str().rfind("OK", 0) == 0);

  auto text = slurp(dir / "ok.json");
  for (std::size_t at; (at = text.find("0.25")) != std::string::npos;) text.replace(at, 4, "0.5");
  write_file(dir / "rho.json", text);
  out.str("");
  CHECK(cmd_validate(dir / "rho.json", out, err) == 1);
  CHECK(out.str().find("rho-normalization") != std::string::npos);
  CHECK(out.str().find("measured 2") != std::string::npos);

  write_file(dir / "broken.json", "{\"domain\": [");
  CHECK(cmd_validate(dir / "broken.json", out, err) == 2);
  CHECK(cmd_validate(dir / "absent.json", out, err) == 1);
}

TEST_CASE("simulate command") {
  testing::TempDir dir("simulate");
  std::ostringstream out, err;
  write_compartment_spec(dir / "spec.json", build_compartment(testing::minimal_description()),
                         ModelParameters::defaults(1));
  write_file(dir / "config.json", "{\"dt\": 0.025, \"duration\": 20, \"seed\": 3, \"record_every\": 4}");
  SimulateOptions opt;
  opt.spec = dir / "spec.json";
  opt.config = dir / "config.json";
  opt.out_dir = dir / "run" / "nested";
  REQUIRE(cmd_simulate(opt, out, err) == 0);
  const auto trace = read_v_trace(opt.out_dir / "v_trace.csv");
  CHECK(trace.values.size() == 201);
  for (double v : trace.values) CHECK(std::abs(v) < 1e-6);
  for (const char* f : {"record.csv", "spikes.json", "weights.csv", "manifest.json"}) CHECK(fs::exists(opt.out_dir / f));
  const auto manifest = slurp(opt.out_dir / "manifest.json");
  CHECK(manifest.find(sha256_file(opt.out_dir / "v_trace.csv")) != std::string::npos);

  CHECK(cmd_simulate(opt, out, err) == 1);
  CHECK(err.str().find("--force") != std::string::npos);
  opt.force = true;
  CHECK(cmd_simulate(opt, out, err) == 0);

  write_file(dir / "bad_config.json", "{\"dt\": 0.1, \"duration\": 20}");
  opt.config = dir / "bad_config.json";
  CHECK(cmd_simulate(opt, out, err) == 1);
}

TEST_CASE("analyze command") {
  testing::TempDir dir("analyze");
  std::ostringstream out, err;
  std::vector<double> t, v;
  for (int k = 0; k < 4000; ++k) {
    t.push_back(k * 0.5);
    v.push_back(3.0 * std::sin(2 * std::numbers::pi * 50.0 * k * 0.5e-3));
  }
  write_v_trace(dir / "sine.csv", t, v);
  AnalyzeOptions opt;
  opt.v_trace = dir / "sine.csv";
  opt.out_dir = dir / "report";
  opt.plots = true;
  REQUIRE(cmd_analyze(opt, out, err) == 0);
  const double hz = std::stod(out.str().substr(out.str().find(' ') + 1));
  CHECK(std::abs(hz - 50.0) < 1.0);
  CHECK(fs::exists(opt.out_dir / "spectrum.json"));
  CHECK(fs::exists(opt.out_dir / "spectrum.svg"));

  write_v_trace(dir / "short.csv", std::vector<double>(t.begin(), t.begin() + 20), std::vector<double>(v.begin(), v.begin() + 20));
  opt.v_trace = dir / "short.csv";
  CHECK(cmd_analyze(opt, out, err) == 1);
  CHECK(err.str().find("SignalTooShort") != std::string::npos);
}
