#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ncell/builder.hpp"
#include "ncell/dynamics.hpp"

namespace ncell {

// A compartment spec file: structure plus per-class kinetics. See
// docs/spec-format.md for the key reference.
struct CompartmentSpec {
  CompartmentDescription description;
  ModelParameters dynamics;
};

// Relative grid-file references resolve against `base_dir`. Syntax and schema
// errors throw ParseError with the 1-based line and column of the offending
// value; unreadable files throw Io.
CompartmentSpec parse_compartment_spec(std::string_view text, const std::string& origin,
                                       const std::filesystem::path& base_dir);
CompartmentSpec read_compartment_spec(const std::filesystem::path& path);

enum class FieldStorage {
  Inline,  // values arrays inside the JSON document
  Files,   // <stem>.rho.ncg / <stem>.chi.ncg stacks next to the spec
};

// Writes every node with its position, so reading back reproduces `c`
// exactly (same structure_checksum). Files are written atomically.
void write_compartment_spec(const std::filesystem::path& path, const Compartment& c,
                            const ModelParameters& dynamics, FieldStorage storage = FieldStorage::Inline);

SimulationConfig parse_sim_config(std::string_view text, const std::string& origin);
SimulationConfig read_sim_config(const std::filesystem::path& path);
std::string format_sim_config(const SimulationConfig& config);

// Whole-file read; throws Io.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace ncell
