#include "ncell/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <ostream>

#include "json_text.hpp"
#include "ncell/atomic_file.hpp"
#include "ncell/averaging.hpp"
#include "ncell/digest.hpp"
#include "ncell/error.hpp"
#include "ncell/spec_file.hpp"
#include "ncell/striatum.hpp"
#include "ncell/svg_plot.hpp"

namespace ncell {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;

constexpr const char* kManifest = "manifest.json";

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: Io: " << e.what() << '\n';
    return 1;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return 1;
  }
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void prepare_out_dir(const fs::path& dir, bool force) {
  fs::create_directories(dir);
  if (fs::exists(dir / kManifest) && !force) {
    throw Error(ErrorCode::InvalidConfig,
                (dir / kManifest).string() + " already exists; pass --force to overwrite the run");
  }
}

class Manifest {
 public:
  Manifest(std::string command, fs::path dir) : dir_(std::move(dir)) {
    doc_["tool"] = "ncell";
    doc_["version"] = kToolVersion;
    doc_["command"] = std::move(command);
    doc_["started_utc"] = utc_now();
  }

  void input(const char* role, const fs::path& path) {
    doc_[role] = path.string();
    doc_[std::string(role) + "_digest"] = sha256_file(path);
  }
  void set(const char* key, json value) { doc_[key] = std::move(value); }
  void output(const fs::path& file) { outputs_.push_back(file); }

  void write() {
    json files = json::array();
    for (const auto& f : outputs_) {
      const auto path = dir_ / f;
      files.push_back({{"file", f.string()}, {"sha256", sha256_file(path)}, {"bytes", fs::file_size(path)}});
    }
    doc_["outputs"] = files;
    doc_["finished_utc"] = utc_now();
    AtomicFile out(dir_ / kManifest);
    out.stream() << detail::format_json(doc_);
    out.commit();
  }

 private:
  fs::path dir_;
  json doc_;
  std::vector<fs::path> outputs_;
};

struct PipelineResult {
  Compartment compartment;
  SimulationConfig config;
  SimulationRecord record;
  std::vector<double> v;
};

// spec + config -> record, v(t), spikes, weights; shared by simulate and the demo.
PipelineResult run_pipeline(const fs::path& spec_path, const fs::path& config_path, const fs::path& out_dir,
                            OutputFormat format, int threads, std::optional<std::uint64_t> seed,
                            Manifest& manifest) {
  const auto spec = read_compartment_spec(spec_path);
  PipelineResult r;
  r.compartment = build_compartment(spec.description);
  r.config = read_sim_config(config_path);
  if (seed) r.config.seed = *seed;
  r.config.threads = threads;
  manifest.input("spec", spec_path);
  manifest.input("config", config_path);
  manifest.set("seed", r.config.seed);
  manifest.set("structure_checksum", structure_checksum(r.compartment));

  r.record = simulate(r.compartment, r.config, spec.dynamics);
  const auto weights = precompute_weights(r.compartment, threads);
  r.v = average_trace(weights, r.record, threads);

  const std::string record_name = record_file_name(format);
  write_record(out_dir / record_name, r.record, format);
  write_v_trace(out_dir / "v_trace.csv", r.record.times, r.v);
  write_spikes(out_dir / "spikes.json", r.record);
  write_weights(out_dir / "weights.csv", weights);
  for (const char* f : {record_name.c_str(), "v_trace.csv", "spikes.json", "weights.csv"}) manifest.output(f);
  manifest.set("clamp_events", r.record.clamp_events);
  return r;
}

RadialityReport radiality_within(const SimulationRecord& record, const Compartment& c, const Position& source,
                                 double threshold_mV, double window_ms) {
  std::map<int, double> early;
  for (const auto& [id, t] : activation_latencies(record, threshold_mV)) {
    if (t <= window_ms) early[id] = t;
  }
  std::map<int, Position> positions;
  for (const auto& n : c.neurons) positions[n.id] = n.position;
  return radiality_score(early, positions, source);
}

void write_spectrum_plot(const fs::path& path, const SpectrumReport& spectrum) {
  std::vector<double> f, p;
  for (std::size_t k = 0; k < spectrum.frequencies.size(); ++k) {
    if (spectrum.frequencies[k] > 2.0 * spectrum.band_hi) break;
    f.push_back(spectrum.frequencies[k]);
    p.push_back(spectrum.power[k]);
  }
  write_svg(path, svg_line_chart(f, p, {"v(t) power, dominant " + format_number(spectrum.dominant_hz) + " Hz",
                                        "frequency (Hz)", "power (mV^2/Hz)"},
                                 true));
}

void write_radiality_plot(const fs::path& path, const RadialityReport& rr, const Compartment& c) {
  std::vector<double> dist, lat;
  for (const auto& [id, t] : rr.latencies) {
    const long k = c.neuron_index(id);
    if (k < 0) continue;
    const auto& p = c.neurons[static_cast<std::size_t>(k)].position;
    dist.push_back(std::hypot(p[0] - rr.source[0], p[1] - rr.source[1], p[2] - rr.source[2]));
    lat.push_back(t);
  }
  write_svg(path, svg_scatter(dist, lat, {"activation latency vs distance, r = " + format_number(rr.pearson_r),
                                          "distance from source", "latency (ms)"}));
}

}  // namespace

std::string record_file_name(OutputFormat format) {
  return format == OutputFormat::Binary ? "record.ncg" : "record.csv";
}

int cmd_validate(const fs::path& spec_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto spec = read_compartment_spec(spec_path);
    Compartment c;
    try {
      c = assemble_compartment(spec.description);
    } catch (const Error& e) {
      out << "INVALID " << spec_path.string() << "\n  " << e.what() << '\n';
      return 1;
    }
    const auto report = validate_compartment(c);
    if (report.empty()) {
      out << "OK " << spec_path.string() << " (" << c.neurons.size() << " neurons, " << c.ncells.size()
          << " n-cells)\n";
      return 0;
    }
    out << "INVALID " << spec_path.string() << ": " << report.size() << " violation(s)\n";
    for (const auto& v : report) {
      out << "  [" << v.rule << "] " << v.entity << ": " << v.message << " (measured " << format_number(v.measured)
          << ")\n";
    }
    return 1;
  });
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    prepare_out_dir(opt.out_dir, opt.force);
    Manifest manifest("simulate", opt.out_dir);
    const auto r = run_pipeline(opt.spec, opt.config, opt.out_dir, opt.format, opt.threads, opt.seed, manifest);
    manifest.write();
    out << "simulated " << r.record.cols() << " neurons for " << format_number(r.config.duration) << " ms ("
        << r.record.steps << " steps); outputs in " << opt.out_dir.string() << '\n';
    return 0;
  });
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.record && !opt.spec) throw Error(ErrorCode::InvalidConfig, "radiality needs --spec for neuron positions");
    if (opt.record && !opt.source_neuron && !opt.source_position) {
      throw Error(ErrorCode::InvalidConfig, "radiality needs --source-neuron or --source");
    }
    fs::create_directories(opt.out_dir);
    const auto trace = read_v_trace(opt.v_trace);
    const double rate = sample_rate_from_times(trace.times);
    const auto spectrum = analyze_signal(trace.values, rate, opt.cutoff_hz, opt.band_lo, opt.band_hi);
    write_spectrum_report(opt.out_dir / "spectrum.json", spectrum);
    out << "dominant_hz " << format_number(spectrum.dominant_hz) << '\n';

    std::optional<RadialityReport> rr;
    Compartment c;
    if (opt.record) {
      c = build_compartment(read_compartment_spec(*opt.spec).description);
      const auto record = read_record(*opt.record);
      Position source{};
      if (opt.source_neuron) {
        const long k = c.neuron_index(*opt.source_neuron);
        if (k < 0) throw Error(ErrorCode::MissingNeuron, "source neuron " + std::to_string(*opt.source_neuron) + " is not in the spec");
        source = c.neurons[static_cast<std::size_t>(k)].position;
      } else {
        source = *opt.source_position;
      }
      rr = radiality_within(record, c, source, opt.threshold_mV, opt.window_ms);
      write_radiality_report(opt.out_dir / "radiality.json", *rr);
      out << "pearson_r " << format_number(rr->pearson_r) << " over " << rr->n_active << " neurons\n";
    }
    if (opt.plots) {
      write_spectrum_plot(opt.out_dir / "spectrum.svg", spectrum);
      if (rr) write_radiality_plot(opt.out_dir / "radiality.svg", *rr, c);
    }
    return 0;
  });
}

int cmd_demo_striatum(const DemoOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    prepare_out_dir(opt.out_dir, opt.force);
    Manifest manifest("demo-striatum", opt.out_dir);

    striatum::StriatumParams params;
    params.total_neurons = opt.total_neurons;
    params.seed = opt.seed;
    const auto model = striatum::build_striatum_model(params);
    const fs::path spec_path = opt.out_dir / "striatum.json";
    write_compartment_spec(spec_path, model.compartment, model.dynamics, FieldStorage::Files);

    SimulationConfig cfg;
    cfg.dt = opt.dt_ms;
    cfg.duration = opt.duration_ms;
    cfg.seed = opt.seed;
    cfg.record_every = opt.record_every;
    cfg.stimuli.push_back(striatum::demo_stimulus(model.compartment, opt.duration_ms, params.stimulus_amplitude));
    validate_config(cfg);
    const fs::path config_path = opt.out_dir / "config.json";
    {
      AtomicFile f(config_path);
      f.stream() << format_sim_config(cfg);
      f.commit();
    }

    // Run from the emitted files so the demo is exactly what simulate would do.
    const auto r = run_pipeline(spec_path, config_path, opt.out_dir, opt.format, opt.threads, std::nullopt, manifest);
    for (const char* f : {"striatum.rho.ncg", "striatum.chi.ncg"}) manifest.output(f);

    const double rate = sample_rate_from_times(r.record.times);
    const auto spectrum = analyze_signal(r.v, rate);
    write_spectrum_report(opt.out_dir / "spectrum.json", spectrum);

    const int source_id = cfg.stimuli.front().target.ids.front();
    const auto& source = r.compartment.neurons[static_cast<std::size_t>(r.compartment.neuron_index(source_id))].position;
    const auto rr = radiality_within(r.record, r.compartment, source, kDefaultActivationMv, 200.0);
    write_radiality_report(opt.out_dir / "radiality.json", rr);

    const auto frames = activation_frames(r.record, r.compartment, kDefaultActivationMv, opt.frame_stride_ms);
    write_grid(opt.out_dir / "frames.ncg", frames.extents, frames.values);

    write_spectrum_plot(opt.out_dir / "spectrum.svg", spectrum);
    write_radiality_plot(opt.out_dir / "radiality.svg", rr, r.compartment);
    for (const char* f : {"spectrum.json", "radiality.json", "frames.ncg", "spectrum.svg", "radiality.svg"}) {
      manifest.output(f);
    }
    manifest.set("stimulated_neuron", source_id);
    manifest.set("dominant_hz", spectrum.dominant_hz);
    manifest.set("pearson_r", rr.pearson_r);
    manifest.write();

    out << "neurons " << r.record.cols() << "\nstimulated_neuron " << source_id << "\ndominant_hz "
        << format_number(spectrum.dominant_hz) << "\npearson_r " << format_number(rr.pearson_r) << " over "
        << rr.n_active << " neurons\noutputs " << opt.out_dir.string() << '\n';
    return 0;
  });
}

}  // namespace ncell
