// ncell: validate compartment specs, simulate them, analyze v(t), and run the
// striatum demo. Exit status 0 success, 1 domain error, 2 usage/parse error.

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ncell/commands.hpp"

namespace {

// Relative --out paths resolve under $NCELL_OUT_ROOT when it is set.
std::filesystem::path out_path(const std::string& given) {
  std::filesystem::path p(given);
  const char* root = std::getenv("NCELL_OUT_ROOT");
  if (p.is_relative() && root && *root) return std::filesystem::path(root) / p;
  return p;
}

std::optional<ncell::Position> parse_position(const std::string& text) {
  ncell::Position p{0.0, 0.0, 0.0};
  std::stringstream ss(text);
  std::string item;
  int axis = 0;
  while (std::getline(ss, item, ',')) {
    if (axis >= 3) return std::nullopt;
    try {
      std::size_t used = 0;
      p[axis++] = std::stod(item, &used);
      if (used != item.size()) return std::nullopt;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (axis < 2) return std::nullopt;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ncell: averaged population dynamics over neural compartments"};
  app.set_version_flag("--version", ncell::kToolVersion);
  app.require_subcommand(1);

  std::string spec_path;
  auto* validate = app.add_subcommand("validate", "check a compartment spec; exit 0 iff it has no violations");
  validate->add_option("spec", spec_path, "compartment spec (JSON)")->required();

  ncell::SimulateOptions sim;
  std::string sim_spec, sim_config, sim_out = "run", sim_format = "csv";
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "integrate a compartment and write record, v(t) and manifest");
  simulate->add_option("spec", sim_spec, "compartment spec (JSON)")->required();
  simulate->add_option("config", sim_config, "simulation config (JSON)")->required();
  simulate->add_option("--out", sim_out, "output directory")->capture_default_str();
  simulate->add_option("--format", sim_format, "record format")->check(CLI::IsMember({"csv", "binary"}))->capture_default_str();
  simulate->add_option("--threads", sim.threads, "worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "override the config seed");
  simulate->add_flag("--force", sim.force, "overwrite an existing run in --out");

  ncell::AnalyzeOptions an;
  std::string an_trace, an_record, an_spec, an_source, an_out = ".";
  int an_source_neuron = 0;
  auto* analyze = app.add_subcommand("analyze", "low-pass, spectrum and dominant frequency of v(t); optional radiality");
  analyze->add_option("v_trace", an_trace, "v(t) CSV (t_ms,v_model_mV)")->required();
  auto* an_record_opt = analyze->add_option("--record", an_record, "record file for activation latencies");
  auto* an_spec_opt = analyze->add_option("--spec", an_spec, "compartment spec giving neuron positions");
  auto* an_src_neuron_opt = analyze->add_option("--source-neuron", an_source_neuron, "neuron id at the wave source");
  auto* an_src_opt = analyze->add_option("--source", an_source, "wave source position x,y[,z]");
  an_src_neuron_opt->excludes(an_src_opt);
  an_record_opt->needs(an_spec_opt);
  analyze->add_option("--cutoff", an.cutoff_hz, "low-pass cutoff (Hz)")->capture_default_str();
  analyze->add_option("--band-lo", an.band_lo, "lower edge of the search band (Hz)")->capture_default_str();
  analyze->add_option("--band-hi", an.band_hi, "upper edge of the search band (Hz)")->capture_default_str();
  analyze->add_option("--threshold", an.threshold_mV, "activation threshold on u (mV)")->capture_default_str();
  analyze->add_option("--window", an.window_ms, "radiality uses neurons activating by this time (ms)")->capture_default_str();
  analyze->add_option("--out", an_out, "report directory")->capture_default_str();
  analyze->add_flag("--plots", an.plots, "also write SVG plots");

  ncell::DemoOptions demo;
  std::string demo_out = "striatum_demo", demo_format = "binary";
  auto* demo_cmd = app.add_subcommand("demo-striatum", "build the striatum compartment, stimulate one cholinergic neuron, analyze");
  demo_cmd->add_option("--out", demo_out, "output directory")->capture_default_str();
  demo_cmd->add_option("--total-neurons", demo.total_neurons, "network size")->check(CLI::PositiveNumber)->capture_default_str();
  demo_cmd->add_option("--seed", demo.seed, "structure seed")->capture_default_str();
  demo_cmd->add_option("--duration", demo.duration_ms, "simulated time (ms)")->check(CLI::PositiveNumber)->capture_default_str();
  demo_cmd->add_option("--record-every", demo.record_every, "steps between recorded rows")->check(CLI::PositiveNumber)->capture_default_str();
  demo_cmd->add_option("--format", demo_format, "record format")->check(CLI::IsMember({"csv", "binary"}))->capture_default_str();
  demo_cmd->add_option("--threads", demo.threads, "worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
  demo_cmd->add_flag("--force", demo.force, "overwrite an existing run in --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (validate->parsed()) return ncell::cmd_validate(spec_path, std::cout, std::cerr);
  if (simulate->parsed()) {
    sim.spec = sim_spec;
    sim.config = sim_config;
    sim.out_dir = out_path(sim_out);
    sim.format = ncell::parse_output_format(sim_format);
    if (*sim_seed_opt) sim.seed = sim_seed;
    return ncell::cmd_simulate(sim, std::cout, std::cerr);
  }
  if (analyze->parsed()) {
    an.v_trace = an_trace;
    an.out_dir = out_path(an_out);
    if (*an_record_opt) an.record = an_record;
    if (*an_spec_opt) an.spec = an_spec;
    if (*an_src_neuron_opt) an.source_neuron = an_source_neuron;
    if (*an_src_opt) {
      an.source_position = parse_position(an_source);
      if (!an.source_position) {
        std::cerr << "error: --source expects x,y or x,y,z\n";
        return 2;
      }
    }
    return ncell::cmd_analyze(an, std::cout, std::cerr);
  }
  demo.out_dir = out_path(demo_out);
  demo.format = ncell::parse_output_format(demo_format);
  return ncell::cmd_demo_striatum(demo, std::cout, std::cerr);
}
