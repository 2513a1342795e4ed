#include "ncell/spec_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>

#include "json_text.hpp"
#include "ncell/atomic_file.hpp"
#include "ncell/error.hpp"
#include "ncell/grid_file.hpp"

namespace ncell {
namespace {

using nlohmann::json;
using Ptr = json::json_pointer;

// Schema failures carry the pointer of the offending value; the entry points
// translate it into a line and column.
struct SchemaError {
  Ptr where;
  std::string what;
};

[[noreturn]] void fail(const Ptr& where, std::string what) { throw SchemaError{where, std::move(what)}; }

double as_number(const json& j, const Ptr& p) {
  if (!j.is_number()) fail(p, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(p, "expected a finite number");
  return v;
}

long long as_integer(const json& j, const Ptr& p) {
  if (!j.is_number_integer()) fail(p, "expected an integer");
  if (j.is_number_unsigned()) {
    const auto u = j.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(INT64_MAX)) fail(p, "integer out of range");
    return static_cast<long long>(u);
  }
  return j.get<long long>();
}

int as_int(const json& j, const Ptr& p) {
  const long long v = as_integer(j, p);
  if (v < INT32_MIN || v > INT32_MAX) fail(p, "integer out of range");
  return static_cast<int>(v);
}

// Object view that rejects keys outside `allowed`.
class Obj {
 public:
  Obj(const json& j, Ptr p, std::initializer_list<const char*> allowed) : j_(j), p_(std::move(p)) {
    if (!j.is_object()) fail(p_, "expected an object");
    for (const auto& item : j.items()) {
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* a) { return item.key() == a; });
      if (!known) fail(p_ / item.key(), "unknown key '" + item.key() + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  Ptr ptr(const char* key) const { return p_ / key; }
  const Ptr& self() const { return p_; }

  const json& at(const char* key) const {
    if (!has(key)) fail(p_, std::string("missing key '") + key + "'");
    return j_.at(key);
  }
  double num(const char* key) const { return as_number(at(key), ptr(key)); }
  double num_or(const char* key, double fallback) const { return has(key) ? num(key) : fallback; }
  int integer(const char* key) const { return as_int(at(key), ptr(key)); }
  std::string str(const char* key) const {
    const auto& v = at(key);
    if (!v.is_string()) fail(ptr(key), "expected a string");
    return v.get<std::string>();
  }
  bool boolean_or(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_boolean()) fail(ptr(key), "expected true or false");
    return v.get<bool>();
  }
  const json& array(const char* key) const {
    const auto& v = at(key);
    if (!v.is_array()) fail(ptr(key), "expected an array");
    return v;
  }

 private:
  const json& j_;
  Ptr p_;
};

std::vector<double> number_array(const json& j, const Ptr& p) {
  if (!j.is_array()) fail(p, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(as_number(j[k], p / k));
  return out;
}

SpatialDomain read_domain(const json& j, const Ptr& p) {
  const Obj o(j, p, {"dimension", "bounds", "grid_resolution"});
  SpatialDomain d;
  d.dimension = o.integer("dimension");
  if (d.dimension != 2 && d.dimension != 3) fail(o.ptr("dimension"), "dimension must be 2 or 3");
  const auto& bounds = o.array("bounds");
  const auto& res = o.array("grid_resolution");
  if (bounds.size() != static_cast<std::size_t>(d.dimension)) {
    fail(o.ptr("bounds"), "bounds needs one [lower, upper] pair per axis");
  }
  if (res.size() != static_cast<std::size_t>(d.dimension)) {
    fail(o.ptr("grid_resolution"), "grid_resolution needs one entry per axis");
  }
  d.lower = {0.0, 0.0, 0.0};
  d.upper = {0.0, 0.0, 0.0};
  d.resolution = {1, 1, 1};
  for (int a = 0; a < d.dimension; ++a) {
    const auto bp = o.ptr("bounds") / a;
    const auto pair = number_array(bounds[a], bp);
    if (pair.size() != 2) fail(bp, "expected [lower, upper]");
    d.lower[a] = pair[0];
    d.upper[a] = pair[1];
    d.resolution[a] = as_int(res[a], o.ptr("grid_resolution") / a);
    if (d.resolution[a] < 1) fail(o.ptr("grid_resolution") / a, "resolution must be >= 1");
  }
  return d;
}

HHParameters read_membrane(const json& j, const Ptr& p) {
  const Obj o(j, p, {"C_m", "g_Na", "g_K", "g_L", "E_Na", "E_K", "E_L"});
  HHParameters h;
  h.C_m = o.num_or("C_m", h.C_m);
  h.g_Na = o.num_or("g_Na", h.g_Na);
  h.g_K = o.num_or("g_K", h.g_K);
  h.g_L = o.num_or("g_L", h.g_L);
  h.E_Na = o.num_or("E_Na", h.E_Na);
  h.E_K = o.num_or("E_K", h.E_K);
  h.E_L = o.num_or("E_L", h.E_L);
  if (!(h.C_m > 0.0)) fail(o.ptr("C_m"), "C_m must be > 0");
  return h;
}

SynapseParameters read_synapse(const json& j, const Ptr& p) {
  const Obj o(j, p, {"tau_rise", "tau_decay", "g_peak_scale", "excitatory_reversal_mV", "inhibitory_reversal_mV"});
  SynapseParameters s;
  s.tau_rise = o.num_or("tau_rise", s.tau_rise);
  s.tau_decay = o.num_or("tau_decay", s.tau_decay);
  s.g_peak_scale = o.num_or("g_peak_scale", s.g_peak_scale);
  s.excitatory_reversal_mV = o.num_or("excitatory_reversal_mV", s.excitatory_reversal_mV);
  s.inhibitory_reversal_mV = o.num_or("inhibitory_reversal_mV", s.inhibitory_reversal_mV);
  if (!(s.tau_rise > 0.0) || !(s.tau_decay > 0.0) || s.tau_rise == s.tau_decay) {
    fail(p, "synapse time constants must be positive and distinct");
  }
  if (s.g_peak_scale < 0.0) fail(o.ptr("g_peak_scale"), "g_peak_scale must be >= 0");
  return s;
}

class FieldLoader {
 public:
  FieldLoader(const SpatialDomain& d, std::filesystem::path base) : domain_(d), base_(std::move(base)) {}

  std::vector<double> load(const Obj& o) const {
    const int forms = o.has("values") + o.has("file") + o.has("constant") + o.has("uniform");
    if (forms != 1) fail(o.self(), "give exactly one of values, file, constant, uniform");
    const std::size_t n = domain_.lattice_size();
    if (o.has("values")) {
      auto v = number_array(o.at("values"), o.ptr("values"));
      if (v.size() != n) {
        fail(o.ptr("values"), "expected " + std::to_string(n) + " lattice values, got " + std::to_string(v.size()));
      }
      return v;
    }
    if (o.has("constant")) return std::vector<double>(n, o.num("constant"));
    if (o.has("uniform")) {
      const auto& u = o.at("uniform");
      if (!u.is_boolean() || !u.get<bool>()) fail(o.ptr("uniform"), "uniform must be true");
      double volume = 1.0;
      for (int a = 0; a < domain_.dimension; ++a) volume *= domain_.upper[a] - domain_.lower[a];
      return std::vector<double>(n, 1.0 / volume);
    }
    const std::string name = o.str("file");
    const Grid& g = grid(name, o.ptr("file"));
    std::vector<std::uint32_t> expect;
    if (o.has("slice")) expect.push_back(0);
    for (int a = 0; a < domain_.dimension; ++a) expect.push_back(static_cast<std::uint32_t>(domain_.resolution[a]));
    if (o.has("slice")) {
      const int slice = o.integer("slice");
      if (g.extents.size() != expect.size() || slice < 0 || static_cast<std::uint32_t>(slice) >= g.extents[0]) {
        fail(o.ptr("slice"), "slice out of range for grid file " + name);
      }
      expect[0] = g.extents[0];
      if (g.extents != expect) fail(o.ptr("file"), "grid file " + name + " does not match the lattice");
      const auto first = g.values.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(slice) * n);
      return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n));
    }
    if (g.extents != expect) fail(o.ptr("file"), "grid file " + name + " does not match the lattice");
    return g.values;
  }

 private:
  const Grid& grid(const std::string& name, const Ptr& p) const {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    const std::filesystem::path path = std::filesystem::path(name).is_absolute() ? std::filesystem::path(name) : base_ / name;
    try {
      return cache_.emplace(name, read_grid(path)).first->second;
    } catch (const Error& e) {
      fail(p, e.what());
    }
  }

  const SpatialDomain& domain_;
  std::filesystem::path base_;
  mutable std::map<std::string, Grid> cache_;
};

CompartmentSpec read_spec(const json& root, const std::filesystem::path& base) {
  const Ptr top;
  const Obj o(root, top, {"domain", "classes", "ncells", "fields", "g", "sampling_seed", "cross_cell_edges"});
  CompartmentSpec spec;
  auto& d = spec.description;
  d.domain = read_domain(o.at("domain"), o.ptr("domain"));

  const auto& classes = o.array("classes");
  std::vector<std::pair<int, ClassDynamics>> dyn;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const Obj c(classes[k], o.ptr("classes") / k, {"id", "label", "reversal_mV", "modulatory", "membrane", "synapse"});
    NeurotransmitterClass cls;
    cls.id = c.integer("id");
    cls.label = c.str("label");
    cls.synaptic_reversal_mV = c.num("reversal_mV");
    cls.is_modulatory = c.boolean_or("modulatory", false);
    ClassDynamics cd;
    if (c.has("membrane")) cd.hh = read_membrane(c.at("membrane"), c.ptr("membrane"));
    if (c.has("synapse")) cd.synapse = read_synapse(c.at("synapse"), c.ptr("synapse"));
    d.classes.push_back(cls);
    dyn.emplace_back(cls.id, cd);
  }
  std::stable_sort(dyn.begin(), dyn.end(), [](auto& a, auto& b) { return a.first < b.first; });
  for (auto& [id, cd] : dyn) spec.dynamics.per_class.push_back(cd);

  const auto& ncells = o.array("ncells");
  for (std::size_t k = 0; k < ncells.size(); ++k) {
    const Obj c(ncells[k], o.ptr("ncells") / k, {"id", "nodes", "synapses", "psi"});
    NCellDescription cell;
    cell.id = c.integer("id");
    const auto& nodes = c.array("nodes");
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const Obj node(nodes[n], c.ptr("nodes") / n, {"neuron", "class", "position"});
      NodeDescription nd;
      nd.neuron_id = node.integer("neuron");
      nd.class_id = node.integer("class");
      if (node.has("position")) {
        const auto pos = number_array(node.at("position"), node.ptr("position"));
        if (pos.size() != static_cast<std::size_t>(d.domain.dimension)) {
          fail(node.ptr("position"), "position needs one coordinate per axis");
        }
        Position p{0.0, 0.0, 0.0};
        std::copy(pos.begin(), pos.end(), p.begin());
        nd.position = p;
      }
      cell.nodes.push_back(nd);
    }
    if (c.has("psi")) {
      const auto psi = number_array(c.at("psi"), c.ptr("psi"));
      if (psi.size() != cell.nodes.size()) fail(c.ptr("psi"), "psi needs one value per node");
      for (std::size_t n = 0; n < psi.size(); ++n) cell.nodes[n].psi = psi[n];
    }
    if (c.has("synapses")) {
      const auto& syn = c.array("synapses");
      for (std::size_t s = 0; s < syn.size(); ++s) {
        const Obj so(syn[s], c.ptr("synapses") / s, {"pre", "post", "receptor", "weight", "sign"});
        SynapseDescription sd;
        sd.pre = so.integer("pre");
        sd.post = so.integer("post");
        if (so.has("receptor")) sd.receptor_class = so.integer("receptor");
        sd.weight = so.num_or("weight", 1.0);
        if (so.has("sign")) {
          const int sign = so.integer("sign");
          if (sign != 1 && sign != -1) fail(so.ptr("sign"), "sign must be +1 or -1");
          sd.sign = sign;
        }
        cell.synapses.push_back(sd);
      }
    }
    d.ncells.push_back(std::move(cell));
  }

  const Obj fields(o.at("fields"), o.ptr("fields"), {"rho", "chi"});
  const FieldLoader loader(d.domain, base);
  const auto& rho = fields.array("rho");
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const Obj f(rho[k], fields.ptr("rho") / k, {"class", "values", "file", "slice", "constant", "uniform"});
    const int id = f.integer("class");
    if (d.rho.count(id)) fail(f.ptr("class"), "rho for class " + std::to_string(id) + " given twice");
    d.rho[id] = loader.load(f);
  }
  const auto& chi = fields.array("chi");
  for (std::size_t k = 0; k < chi.size(); ++k) {
    const Obj f(chi[k], fields.ptr("chi") / k, {"ncell", "values", "file", "slice", "constant"});
    const int id = f.integer("ncell");
    if (d.chi.count(id)) fail(f.ptr("ncell"), "chi for n-cell " + std::to_string(id) + " given twice");
    d.chi[id] = loader.load(f);
  }

  const Obj g(o.at("g"), o.ptr("g"), {"kind", "params"});
  try {
    d.g.kind = parse_g_kind(g.str("kind"));
  } catch (const Error& e) {
    fail(g.ptr("kind"), e.what());
  }
  if (g.has("params")) {
    const Obj params(g.at("params"), g.ptr("params"), {"constant"});
    d.g.constant = params.num_or("constant", d.g.constant);
  }
  if (o.has("sampling_seed")) {
    const long long seed = as_integer(o.at("sampling_seed"), o.ptr("sampling_seed"));
    d.sampling_seed = static_cast<std::uint64_t>(seed);
  }
  d.cross_cell_edges = o.boolean_or("cross_cell_edges", false);
  return spec;
}

json parse_json(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
    if (const auto cut = msg.find("] "); cut != std::string::npos) msg = msg.substr(cut + 2);
    throw ParseError(origin, line, column, msg);
  }
}

[[noreturn]] void rethrow_schema(const SchemaError& e, std::string_view text, const std::string& origin) {
  const std::size_t at = detail::locate_pointer(text, e.where);
  std::size_t line = 0, column = 0;
  if (at != std::string_view::npos) std::tie(line, column) = detail::line_column(text, at);
  const std::string where = e.where.empty() ? "document root" : e.where.to_string();
  throw ParseError(origin, line, column, e.what + " (at " + where + ")");
}

json field_entry(const char* key, int id, std::span<const double> values, FieldStorage storage,
                 const std::string& file, std::size_t slice) {
  json f;
  f[key] = id;
  if (storage == FieldStorage::Inline) {
    f["values"] = std::vector<double>(values.begin(), values.end());
  } else {
    f["file"] = file;
    f["slice"] = slice;
  }
  return f;
}

std::vector<std::uint32_t> stack_extents(const SpatialDomain& d, std::size_t count) {
  std::vector<std::uint32_t> e{static_cast<std::uint32_t>(count)};
  for (int a = 0; a < d.dimension; ++a) e.push_back(static_cast<std::uint32_t>(d.resolution[a]));
  return e;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "read failed for " + path.string());
  return ss.str();
}

CompartmentSpec parse_compartment_spec(std::string_view text, const std::string& origin,
                                       const std::filesystem::path& base_dir) {
  const json root = parse_json(text, origin);
  try {
    return read_spec(root, base_dir);
  } catch (const SchemaError& e) {
    rethrow_schema(e, text, origin);
  }
}

CompartmentSpec read_compartment_spec(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return parse_compartment_spec(text, path.string(), path.parent_path());
}

void write_compartment_spec(const std::filesystem::path& path, const Compartment& c,
                            const ModelParameters& dynamics, FieldStorage storage) {
  if (dynamics.per_class.size() != c.classes.size()) {
    throw Error(ErrorCode::InvalidConfig, "dynamics must cover every class");
  }
  const auto& d = c.domain;
  json root;
  json bounds = json::array(), res = json::array();
  for (int a = 0; a < d.dimension; ++a) {
    bounds.push_back({d.lower[a], d.upper[a]});
    res.push_back(d.resolution[a]);
  }
  root["domain"] = {{"dimension", d.dimension}, {"bounds", bounds}, {"grid_resolution", res}};

  json classes = json::array();
  for (std::size_t z = 0; z < c.classes.size(); ++z) {
    const auto& cls = c.classes[z];
    const auto& hh = dynamics.per_class[z].hh;
    const auto& syn = dynamics.per_class[z].synapse;
    classes.push_back({{"id", cls.id},
                       {"label", cls.label},
                       {"reversal_mV", cls.synaptic_reversal_mV},
                       {"modulatory", cls.is_modulatory},
                       {"membrane",
                        {{"C_m", hh.C_m}, {"g_Na", hh.g_Na}, {"g_K", hh.g_K}, {"g_L", hh.g_L},
                         {"E_Na", hh.E_Na}, {"E_K", hh.E_K}, {"E_L", hh.E_L}}},
                       {"synapse",
                        {{"tau_rise", syn.tau_rise}, {"tau_decay", syn.tau_decay},
                         {"g_peak_scale", syn.g_peak_scale},
                         {"excitatory_reversal_mV", syn.excitatory_reversal_mV},
                         {"inhibitory_reversal_mV", syn.inhibitory_reversal_mV}}}});
  }
  root["classes"] = classes;

  json ncells = json::array();
  for (const auto& cell : c.ncells) {
    json nodes = json::array();
    for (int id : cell.node_neurons) {
      const auto& n = c.neurons[static_cast<std::size_t>(c.neuron_index(id))];
      json pos = json::array();
      for (int a = 0; a < d.dimension; ++a) pos.push_back(n.position[a]);
      nodes.push_back({{"neuron", n.id}, {"class", n.class_id}, {"position", pos}});
    }
    json synapses = json::array();
    for (const auto& s : cell.synapses) {
      synapses.push_back(
          {{"pre", s.pre}, {"post", s.post}, {"receptor", s.receptor_class}, {"weight", s.weight}, {"sign", s.sign}});
    }
    ncells.push_back({{"id", cell.id}, {"nodes", nodes}, {"psi", cell.psi}, {"synapses", synapses}});
  }
  root["ncells"] = ncells;

  const std::string stem = path.stem().string();
  const std::string rho_file = stem + ".rho.ncg", chi_file = stem + ".chi.ncg";
  json rho = json::array(), chi = json::array();
  for (std::size_t z = 0; z < c.classes.size(); ++z) {
    rho.push_back(field_entry("class", c.classes[z].id, c.rho[z], storage, rho_file, z));
  }
  for (std::size_t i = 0; i < c.ncells.size(); ++i) {
    chi.push_back(field_entry("ncell", c.ncells[i].id, c.chi[i], storage, chi_file, i));
  }
  root["fields"] = {{"rho", rho}, {"chi", chi}};
  json g = {{"kind", to_string(c.g.kind)}};
  if (c.g.kind == GSpec::Kind::Const) g["params"] = {{"constant", c.g.constant}};
  root["g"] = g;
  root["cross_cell_edges"] = c.cross_cell_edges;

  if (storage == FieldStorage::Files) {
    const auto dir = path.parent_path();
    std::vector<double> stack;
    for (const auto& f : c.rho) stack.insert(stack.end(), f.begin(), f.end());
    write_grid(dir / rho_file, stack_extents(d, c.rho.size()), stack);
    stack.clear();
    for (const auto& f : c.chi) stack.insert(stack.end(), f.begin(), f.end());
    write_grid(dir / chi_file, stack_extents(d, c.chi.size()), stack);
  }
  AtomicFile out(path);
  out.stream() << detail::format_json(root);
  out.commit();
}

SimulationConfig parse_sim_config(std::string_view text, const std::string& origin) {
  const json root = parse_json(text, origin);
  try {
    const Obj o(root, Ptr{}, {"dt", "duration", "seed", "record_every", "stimuli"});
    SimulationConfig cfg;
    cfg.dt = o.num_or("dt", cfg.dt);
    cfg.duration = o.num("duration");
    if (o.has("seed")) cfg.seed = static_cast<std::uint64_t>(as_integer(o.at("seed"), o.ptr("seed")));
    if (o.has("record_every")) cfg.record_every = o.integer("record_every");
    if (o.has("stimuli")) {
      const auto& stimuli = o.array("stimuli");
      for (std::size_t k = 0; k < stimuli.size(); ++k) {
        const Obj s(stimuli[k], o.ptr("stimuli") / k, {"target", "amplitude", "onset", "offset"});
        StimulusSpec spec;
        const Obj t(s.at("target"), s.ptr("target"), {"class", "ncell", "neurons"});
        if (t.has("class") + t.has("ncell") + t.has("neurons") != 1) {
          fail(s.ptr("target"), "target needs exactly one of class, ncell, neurons");
        }
        if (t.has("class")) {
          spec.target.kind = NeuronSelector::Kind::ClassLabel;
          spec.target.label = t.str("class");
        } else if (t.has("ncell")) {
          spec.target.kind = NeuronSelector::Kind::NCell;
          spec.target.ncell = t.integer("ncell");
        } else {
          spec.target.kind = NeuronSelector::Kind::Ids;
          const auto& ids = t.array("neurons");
          for (std::size_t n = 0; n < ids.size(); ++n) spec.target.ids.push_back(as_int(ids[n], t.ptr("neurons") / n));
        }
        spec.amplitude = s.num("amplitude");
        spec.onset = s.num_or("onset", 0.0);
        spec.offset = s.num_or("offset", cfg.duration);
        cfg.stimuli.push_back(spec);
      }
    }
    validate_config(cfg);
    return cfg;
  } catch (const SchemaError& e) {
    rethrow_schema(e, text, origin);
  }
}

SimulationConfig read_sim_config(const std::filesystem::path& path) {
  return parse_sim_config(read_text_file(path), path.string());
}

std::string format_sim_config(const SimulationConfig& config) {
  json stimuli = json::array();
  for (const auto& s : config.stimuli) {
    json target;
    switch (s.target.kind) {
      case NeuronSelector::Kind::ClassLabel: target["class"] = s.target.label; break;
      case NeuronSelector::Kind::NCell: target["ncell"] = s.target.ncell; break;
      case NeuronSelector::Kind::Ids: target["neurons"] = s.target.ids; break;
    }
    stimuli.push_back({{"target", target}, {"amplitude", s.amplitude}, {"onset", s.onset}, {"offset", s.offset}});
  }
  const json root = {{"dt", config.dt},
                     {"duration", config.duration},
                     {"seed", config.seed},
                     {"record_every", config.record_every},
                     {"stimuli", stimuli}};
  return detail::format_json(root);
}

}  // namespace ncell
