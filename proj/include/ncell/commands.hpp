#pragma once

// Command implementations behind the ncell executable. Each returns the
// process exit status: 0 success, 1 domain error, 2 parse or usage error.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ncell/record_io.hpp"

namespace ncell {

inline constexpr const char* kToolVersion = "0.1.0";

int cmd_validate(const std::filesystem::path& spec, std::ostream& out, std::ostream& err);

struct SimulateOptions {
  std::filesystem::path spec;
  std::filesystem::path config;
  std::filesystem::path out_dir;
  OutputFormat format = OutputFormat::Csv;
  int threads = 0;
  bool force = false;
  std::optional<std::uint64_t> seed;  // overrides the config's seed when set
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);

struct AnalyzeOptions {
  std::filesystem::path v_trace;
  std::optional<std::filesystem::path> record;
  std::optional<std::filesystem::path> spec;  // neuron positions for radiality
  std::optional<int> source_neuron;
  std::optional<Position> source_position;
  std::filesystem::path out_dir = ".";
  double cutoff_hz = kDefaultCutoffHz;
  double band_lo = kDefaultBandLoHz;
  double band_hi = kDefaultBandHiHz;
  double threshold_mV = kDefaultActivationMv;
  double window_ms = 200.0;  // radiality uses neurons activating by this time
  bool plots = false;
};

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err);

struct DemoOptions {
  std::filesystem::path out_dir;
  int total_neurons = 6400;
  std::uint64_t seed = 1;
  double duration_ms = 2000.0;
  double dt_ms = 0.025;
  int record_every = 40;  // 1 ms at the default step
  double frame_stride_ms = 1.0;
  OutputFormat format = OutputFormat::Binary;
  int threads = 0;
  bool force = false;
};

int cmd_demo_striatum(const DemoOptions& opt, std::ostream& out, std::ostream& err);

// Output names used by simulate and demo-striatum.
std::string record_file_name(OutputFormat format);

}  // namespace ncell
