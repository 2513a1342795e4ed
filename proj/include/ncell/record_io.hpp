#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ncell/analysis.hpp"
#include "ncell/averaging.hpp"
#include "ncell/dynamics.hpp"
#include "ncell/grid_file.hpp"

namespace ncell {

enum class OutputFormat { Csv, Binary };

OutputFormat parse_output_format(const std::string& name);

// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

// CSV: header "t_ms,n<id>,..." then one row per sample.
// Binary: NCG1 grid of extents [rows + 1, neurons + 1]; row 0 holds NaN then
// the neuron ids, column 0 of later rows holds t_ms.
void write_record(const std::filesystem::path& path, const SimulationRecord& record, OutputFormat format);
// Detects the format from the leading bytes. Spikes are not stored.
SimulationRecord read_record(const std::filesystem::path& path);

struct Trace {
  std::vector<double> times;   // ms
  std::vector<double> values;  // mV
};

// CSV with header "t_ms,v_model_mV".
void write_v_trace(const std::filesystem::path& path, std::span<const double> times, std::span<const double> v);
Trace read_v_trace(const std::filesystem::path& path);

// JSON array of {"neuron_id": id, "times": [...]}, ascending id.
void write_spikes(const std::filesystem::path& path, const SimulationRecord& record);

// CSV "neuron_id,weight".
void write_weights(const std::filesystem::path& path, const AveragingWeights& weights);

void write_spectrum_report(const std::filesystem::path& path, const SpectrumReport& report);
void write_radiality_report(const std::filesystem::path& path, const RadialityReport& report);

// Count of neurons with u above `threshold_mV` per lattice cell, one frame
// every `stride_ms` of recorded time. Extents [frames, resolution...].
// Throws InvalidConfig when the record's sampling does not divide the stride.
Grid activation_frames(const SimulationRecord& record, const Compartment& c, double threshold_mV, double stride_ms);

}  // namespace ncell
