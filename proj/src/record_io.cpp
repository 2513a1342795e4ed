#include "ncell/record_io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "json_text.hpp"
#include "ncell/atomic_file.hpp"
#include "ncell/error.hpp"
#include "ncell/spec_file.hpp"

namespace ncell {
namespace {

using nlohmann::json;

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

// Splits one CSV line on commas; fields are numbers or the header tokens.
std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError(path.string(), line, 0, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

// Line-oriented reader over an in-memory file.
class Lines {
 public:
  explicit Lines(std::string text) : text_(std::move(text)) {}

  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      const auto nl = text_.find('\n', pos_);
      const auto end = nl == std::string::npos ? text_.size() : nl;
      line = std::string_view(text_).substr(pos_, end - pos_);
      pos_ = end + 1;
      ++number_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) return true;
    }
    return false;
  }
  std::size_t number() const { return number_; }

 private:
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  AtomicFile out(path, std::ios::binary);
  out.stream() << text;
  out.commit();
}

json spectrum_json(const SpectrumReport& r) {
  return {{"sample_rate_hz", r.sample_rate}, {"cutoff_hz", r.cutoff_hz},  {"band_hz", {r.band_lo, r.band_hi}},
          {"dominant_hz", r.dominant_hz},    {"frequencies_hz", r.frequencies}, {"power", r.power},
          {"filtered_mV", r.filtered}};
}

}  // namespace

OutputFormat parse_output_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "binary") return OutputFormat::Binary;
  throw Error(ErrorCode::InvalidConfig, "unknown output format '" + name + "' (csv or binary)");
}

std::string format_number(double v) {
  std::string s;
  append_number(s, v);
  return s;
}

void write_record(const std::filesystem::path& path, const SimulationRecord& record, OutputFormat format) {
  const std::size_t rows = record.rows(), cols = record.cols();
  if (record.u.size() != rows * cols) throw Error(ErrorCode::ShapeMismatch, "record values do not match its shape");
  if (format == OutputFormat::Binary) {
    std::vector<double> grid;
    grid.reserve((rows + 1) * (cols + 1));
    grid.push_back(std::numeric_limits<double>::quiet_NaN());
    for (int id : record.neuron_ids) grid.push_back(static_cast<double>(id));
    for (std::size_t r = 0; r < rows; ++r) {
      grid.push_back(record.times[r]);
      const auto row = record.row(r);
      grid.insert(grid.end(), row.begin(), row.end());
    }
    const std::uint32_t extents[] = {static_cast<std::uint32_t>(rows + 1), static_cast<std::uint32_t>(cols + 1)};
    write_grid(path, extents, grid);
    return;
  }
  AtomicFile file(path, std::ios::binary);
  auto& out = file.stream();
  std::string line = "t_ms";
  for (int id : record.neuron_ids) line += ",n" + std::to_string(id);
  line += '\n';
  out << line;
  for (std::size_t r = 0; r < rows; ++r) {
    line.clear();
    append_number(line, record.times[r]);
    for (double v : record.row(r)) {
      line += ',';
      append_number(line, v);
    }
    line += '\n';
    out << line;
  }
  file.commit();
}

SimulationRecord read_record(const std::filesystem::path& path) {
  SimulationRecord rec;
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw Error(ErrorCode::Io, "cannot open " + path.string());
    char magic[4] = {};
    probe.read(magic, 4);
    if (probe.gcount() == 4 && std::memcmp(magic, "NCG1", 4) == 0) {
      probe.close();
      const Grid g = read_grid(path);
      if (g.extents.size() != 2 || g.extents[0] < 1 || g.extents[1] < 1) {
        throw Error(ErrorCode::ShapeMismatch, path.string() + " is not a 2-axis record grid");
      }
      const std::size_t rows = g.extents[0] - 1, width = g.extents[1];
      for (std::size_t c = 1; c < width; ++c) rec.neuron_ids.push_back(static_cast<int>(g.values[c]));
      rec.u.reserve(rows * (width - 1));
      for (std::size_t r = 1; r <= rows; ++r) {
        const double* row = g.values.data() + r * width;
        rec.times.push_back(row[0]);
        rec.u.insert(rec.u.end(), row + 1, row + width);
      }
      rec.spikes.resize(rec.neuron_ids.size());
      return rec;
    }
  }
  Lines lines(read_text_file(path));
  std::string_view line;
  if (!lines.next(line)) throw ParseError(path.string(), 1, 1, "empty record file");
  const auto header = split(line);
  if (header.empty() || header[0] != "t_ms") throw ParseError(path.string(), lines.number(), 1, "header must start with t_ms");
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto h = header[c];
    int id = 0;
    const auto res = h.size() > 1 ? std::from_chars(h.data() + 1, h.data() + h.size(), id) : std::from_chars_result{};
    if (h.size() < 2 || h[0] != 'n' || res.ec != std::errc() || res.ptr != h.data() + h.size()) {
      throw ParseError(path.string(), lines.number(), 0, "bad column name '" + std::string(h) + "'");
    }
    rec.neuron_ids.push_back(id);
  }
  while (lines.next(line)) {
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError(path.string(), lines.number(), 0,
                       "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    rec.times.push_back(parse_double(fields[0], path, lines.number()));
    for (std::size_t c = 1; c < fields.size(); ++c) rec.u.push_back(parse_double(fields[c], path, lines.number()));
  }
  rec.spikes.resize(rec.neuron_ids.size());
  return rec;
}

void write_v_trace(const std::filesystem::path& path, std::span<const double> times, std::span<const double> v) {
  if (times.size() != v.size()) throw Error(ErrorCode::ShapeMismatch, "time axis and v(t) differ in length");
  std::string text = "t_ms,v_model_mV\n";
  for (std::size_t k = 0; k < v.size(); ++k) {
    append_number(text, times[k]);
    text += ',';
    append_number(text, v[k]);
    text += '\n';
  }
  write_text(path, text);
}

Trace read_v_trace(const std::filesystem::path& path) {
  Lines lines(read_text_file(path));
  std::string_view line;
  if (!lines.next(line)) throw ParseError(path.string(), 1, 1, "empty trace file");
  const auto header = split(line);
  if (header.size() != 2 || header[0] != "t_ms") {
    throw ParseError(path.string(), lines.number(), 1, "header must be t_ms,v_model_mV");
  }
  Trace t;
  while (lines.next(line)) {
    const auto fields = split(line);
    if (fields.size() != 2) throw ParseError(path.string(), lines.number(), 0, "expected 2 fields");
    t.times.push_back(parse_double(fields[0], path, lines.number()));
    t.values.push_back(parse_double(fields[1], path, lines.number()));
  }
  return t;
}

void write_spikes(const std::filesystem::path& path, const SimulationRecord& record) {
  json out = json::array();
  for (std::size_t i = 0; i < record.neuron_ids.size(); ++i) {
    out.push_back({{"neuron_id", record.neuron_ids[i]},
                   {"times", i < record.spikes.size() ? record.spikes[i] : std::vector<double>{}}});
  }
  write_text(path, detail::format_json(out, 160));
}

void write_weights(const std::filesystem::path& path, const AveragingWeights& weights) {
  std::string text = "neuron_id,weight\n";
  for (std::size_t k = 0; k < weights.neuron_ids.size(); ++k) {
    text += std::to_string(weights.neuron_ids[k]);
    text += ',';
    append_number(text, weights.w[k]);
    text += '\n';
  }
  write_text(path, text);
}

void write_spectrum_report(const std::filesystem::path& path, const SpectrumReport& report) {
  write_text(path, detail::format_json(spectrum_json(report), 4096));
}

void write_radiality_report(const std::filesystem::path& path, const RadialityReport& report) {
  json lat = json::array();
  for (const auto& [id, t] : report.latencies) lat.push_back({id, t});
  const json out = {{"source", report.source},
                    {"pearson_r", report.pearson_r},
                    {"n_active", report.n_active},
                    {"latencies_ms", lat}};
  write_text(path, detail::format_json(out, 4096));
}

Grid activation_frames(const SimulationRecord& record, const Compartment& c, double threshold_mV, double stride_ms) {
  if (!(stride_ms > 0.0)) throw Error(ErrorCode::InvalidConfig, "frame stride must be > 0");
  if (record.rows() < 2) throw Error(ErrorCode::InvalidConfig, "record needs at least two rows for frames");
  const double sample = record.times[1] - record.times[0];
  const double ratio = stride_ms / sample;
  const auto every = static_cast<std::size_t>(std::llround(ratio));
  if (every < 1 || std::abs(ratio - static_cast<double>(every)) > 1e-9 * ratio) {
    throw Error(ErrorCode::InvalidConfig, "frame stride " + format_number(stride_ms) +
                                              " ms is not a multiple of the record spacing " + format_number(sample) +
                                              " ms");
  }
  std::vector<std::size_t> cell(record.cols());
  for (std::size_t k = 0; k < record.cols(); ++k) {
    const long idx = c.neuron_index(record.neuron_ids[k]);
    if (idx < 0) throw Error(ErrorCode::MissingNeuron, "record column n" + std::to_string(record.neuron_ids[k]) + " is not in the compartment");
    cell[k] = c.domain.cell_of(c.neurons[static_cast<std::size_t>(idx)].position);
  }
  const std::size_t lattice = c.domain.lattice_size();
  Grid g;
  const std::size_t frames = (record.rows() - 1) / every + 1;
  g.extents.push_back(static_cast<std::uint32_t>(frames));
  for (int a = 0; a < c.domain.dimension; ++a) g.extents.push_back(static_cast<std::uint32_t>(c.domain.resolution[a]));
  g.values.assign(frames * lattice, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto row = record.row(f * every);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] > threshold_mV) g.values[f * lattice + cell[k]] += 1.0;
    }
  }
  return g;
}

}  // namespace ncell
