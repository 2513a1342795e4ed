#include "ncell/compartment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "ncell/digest.hpp"
#include "ncell/error.hpp"

namespace ncell {

int NeurotransmitterClass::natural_sign() const {
  if (is_modulatory) return 0;
  return synaptic_reversal_mV > kExcitatoryPivotMv ? 1 : -1;
}

std::size_t SpatialDomain::lattice_size() const {
  std::size_t n = 1;
  for (int a = 0; a < dimension; ++a) n *= static_cast<std::size_t>(std::max(resolution[a], 0));
  return n;
}

Position SpatialDomain::cell_extent() const {
  Position h{0.0, 0.0, 0.0};
  for (int a = 0; a < dimension; ++a) h[a] = (upper[a] - lower[a]) / resolution[a];
  return h;
}

double SpatialDomain::cell_volume() const {
  const auto h = cell_extent();
  double v = 1.0;
  for (int a = 0; a < dimension; ++a) v *= h[a];
  return v;
}

std::array<int, 3> SpatialDomain::cell_coords(std::size_t flat) const {
  std::array<int, 3> c{0, 0, 0};
  for (int a = dimension - 1; a >= 0; --a) {
    c[a] = static_cast<int>(flat % resolution[a]);
    flat /= resolution[a];
  }
  return c;
}

Position SpatialDomain::cell_center(std::size_t flat) const {
  const auto c = cell_coords(flat);
  const auto h = cell_extent();
  Position p{0.0, 0.0, 0.0};
  for (int a = 0; a < dimension; ++a) p[a] = lower[a] + (c[a] + 0.5) * h[a];
  return p;
}

bool SpatialDomain::contains(const Position& p) const {
  for (int a = 0; a < dimension; ++a) {
    if (!(p[a] >= lower[a] && p[a] <= upper[a])) return false;
  }
  for (int a = dimension; a < 3; ++a) {
    if (p[a] != 0.0) return false;
  }
  return true;
}

std::size_t SpatialDomain::cell_of(const Position& p) const {
  const auto h = cell_extent();
  std::size_t flat = 0;
  for (int a = 0; a < dimension; ++a) {
    auto k = static_cast<long>(std::floor((p[a] - lower[a]) / h[a]));
    k = std::clamp<long>(k, 0, resolution[a] - 1);
    flat = flat * resolution[a] + static_cast<std::size_t>(k);
  }
  return flat;
}

double GSpec::operator()(std::span<const double> chi_at_point) const {
  switch (kind) {
    case Kind::Sum: {
      double s = 0.0;
      for (double v : chi_at_point) s += v;
      return s;
    }
    case Kind::Max: {
      double m = 0.0;
      for (double v : chi_at_point) m = std::max(m, v);
      return m;
    }
    case Kind::Const:
      return constant;
  }
  return 0.0;
}

const char* to_string(GSpec::Kind kind) {
  switch (kind) {
    case GSpec::Kind::Sum: return "sum";
    case GSpec::Kind::Max: return "max";
    case GSpec::Kind::Const: return "const";
  }
  return "?";
}

GSpec::Kind parse_g_kind(const std::string& name) {
  if (name == "sum") return GSpec::Kind::Sum;
  if (name == "max") return GSpec::Kind::Max;
  if (name == "const") return GSpec::Kind::Const;
  throw Error(ErrorCode::InvalidConfig, "unknown g kind '" + name + "' (expected sum, max or const)");
}

void Compartment::reindex() {
  neuron_lookup_.clear();
  ncell_lookup_.clear();
  for (std::size_t k = 0; k < neurons.size(); ++k) neuron_lookup_.emplace(neurons[k].id, k);
  for (std::size_t k = 0; k < ncells.size(); ++k) ncell_lookup_.emplace(ncells[k].id, k);
}

long Compartment::neuron_index(int id) const {
  const auto it = neuron_lookup_.find(id);
  return it == neuron_lookup_.end() ? -1 : static_cast<long>(it->second);
}

long Compartment::ncell_index(int id) const {
  const auto it = ncell_lookup_.find(id);
  return it == ncell_lookup_.end() ? -1 : static_cast<long>(it->second);
}

double lattice_integral(const SpatialDomain& domain, std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s * domain.cell_volume();
}

namespace {

class Reporter {
 public:
  explicit Reporter(ValidationReport& out) : out_(out) {}

  void add(std::string rule, std::string entity, double measured, std::string message) {
    out_.push_back({std::move(rule), std::move(entity), measured, std::move(message)});
  }

 private:
  ValidationReport& out_;
};

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void check_domain(const SpatialDomain& d, Reporter& r) {
  if (d.dimension != 2 && d.dimension != 3) {
    r.add("domain-dimension", "domain", d.dimension, "dimension must be 2 or 3");
    return;
  }
  static constexpr const char* kAxis[] = {"x", "y", "z"};
  for (int a = 0; a < d.dimension; ++a) {
    const double extent = d.upper[a] - d.lower[a];
    if (!(extent > 0.0) || !std::isfinite(extent)) {
      r.add("domain-extent", std::string("domain axis ") + kAxis[a], extent,
            "bounds must have strictly positive finite extent");
    }
    if (d.resolution[a] < 2) {
      r.add("domain-resolution", std::string("domain axis ") + kAxis[a], d.resolution[a],
            "grid_resolution must be >= 2");
    }
  }
}

void check_classes(const Compartment& c, Reporter& r) {
  for (std::size_t k = 0; k < c.classes.size(); ++k) {
    const auto& cls = c.classes[k];
    const std::string entity = "class " + std::to_string(cls.id);
    if (cls.id != static_cast<int>(k)) {
      r.add("class-ids", entity, cls.id,
            "class ids must be unique and contiguous from 0 (expected " + std::to_string(k) + ")");
    }
    if (!(cls.synaptic_reversal_mV >= -100.0 && cls.synaptic_reversal_mV <= 10.0)) {
      r.add("class-reversal", entity, cls.synaptic_reversal_mV,
            "synaptic_reversal_mV must lie in [-100, 10]");
    }
  }
  if (c.classes.empty()) r.add("class-count", "classes", 0, "at least one class is required");
}

void check_neurons(const Compartment& c, Reporter& r) {
  std::set<std::pair<int, int>> slots;
  std::set<int> ids;
  for (const auto& n : c.neurons) {
    const std::string entity = "neuron " + std::to_string(n.id);
    if (!ids.insert(n.id).second) r.add("neuron-id", entity, n.id, "duplicate neuron id");
    if (!c.domain.contains(n.position)) {
      r.add("neuron-position", entity, n.position[0], "position lies outside the domain bounds");
    }
    if (n.class_id < 0 || n.class_id >= static_cast<int>(c.classes.size())) {
      r.add("neuron-class", entity, n.class_id, "class id does not resolve");
    }
    const long ci = c.ncell_index(n.ncell_id);
    if (ci < 0) {
      r.add("neuron-ncell", entity, n.ncell_id, "n-cell id does not resolve");
      continue;
    }
    if (!slots.insert({n.ncell_id, n.node_index}).second) {
      r.add("neuron-slot", entity, n.node_index,
            "(ncell, node_index) pair is used by more than one neuron");
    }
    const auto& cell = c.ncells[ci];
    if (n.node_index < 0 || n.node_index >= static_cast<int>(cell.node_neurons.size()) ||
        cell.node_neurons[n.node_index] != n.id) {
      r.add("neuron-slot", entity, n.node_index,
            "node_index does not point back to this neuron in ncell " + std::to_string(cell.id));
    }
  }
}

void check_ncells(const Compartment& c, Reporter& r) {
  if (c.ncells.empty()) r.add("ncell-count", "ncells", 0, "at least one n-cell is required");
  std::vector<int> membership(c.neurons.size(), 0);
  std::set<int> cell_ids;
  for (const auto& cell : c.ncells) {
    const std::string entity = "ncell " + std::to_string(cell.id);
    if (!cell_ids.insert(cell.id).second) r.add("ncell-id", entity, cell.id, "duplicate n-cell id");
    std::set<int> local(cell.node_neurons.begin(), cell.node_neurons.end());
    for (int nid : cell.node_neurons) {
      const long ni = c.neuron_index(nid);
      if (ni < 0) {
        r.add("ncell-node", entity, nid, "node neuron " + std::to_string(nid) + " does not exist");
      } else {
        ++membership[ni];
      }
    }
    if (cell.psi.size() != cell.node_neurons.size()) {
      r.add("psi-size", entity, static_cast<double>(cell.psi.size()),
            "psi must have one entry per node (" + std::to_string(cell.node_neurons.size()) + ")");
    }
    bool any_positive = false;
    for (std::size_t k = 0; k < cell.psi.size(); ++k) {
      const double p = cell.psi[k];
      if (!(p >= 0.0) || !std::isfinite(p)) {
        r.add("psi-range", entity + " node " + std::to_string(k), p, "psi must be finite and >= 0");
      }
      any_positive = any_positive || p > 0.0;
    }
    if (!any_positive) {
      r.add("psi-support", entity, 0.0, "at least one psi value must be strictly positive");
    }
    for (std::size_t s = 0; s < cell.synapses.size(); ++s) {
      const auto& syn = cell.synapses[s];
      const std::string sent = entity + " synapse " + std::to_string(s);
      const long pre = c.neuron_index(syn.pre);
      const long post = c.neuron_index(syn.post);
      if (pre < 0 || post < 0) {
        r.add("synapse-endpoint", sent, pre < 0 ? syn.pre : syn.post, "endpoint neuron does not exist");
        continue;
      }
      if (!local.contains(syn.pre)) {
        r.add("synapse-endpoint", sent, syn.pre, "presynaptic neuron is not a node of this n-cell");
      }
      if (!local.contains(syn.post) && !c.cross_cell_edges) {
        r.add("synapse-endpoint", sent, syn.post,
              "postsynaptic neuron is not a node of this n-cell (cross-cell edges disabled)");
      }
      if (syn.pre == syn.post) r.add("synapse-self", sent, syn.pre, "pre and post must differ");
      if (!(syn.weight >= 0.0) || !std::isfinite(syn.weight)) {
        r.add("synapse-weight", sent, syn.weight, "weight must be finite and >= 0");
      }
      if (syn.sign != 1 && syn.sign != -1) {
        r.add("synapse-sign", sent, syn.sign, "sign must be +1 or -1");
      }
      if (syn.receptor_class < 0 || syn.receptor_class >= static_cast<int>(c.classes.size())) {
        r.add("synapse-receptor", sent, syn.receptor_class, "receptor class does not resolve");
        continue;
      }
      if (syn.receptor_class != c.neurons[pre].class_id) {
        r.add("synapse-receptor", sent, syn.receptor_class,
              "receptor class differs from the presynaptic neuron's transmitter class " +
                  std::to_string(c.neurons[pre].class_id));
      }
      const int natural = c.classes[syn.receptor_class].natural_sign();
      if (natural != 0 && syn.sign != natural) {
        r.add("synapse-sign", sent, syn.sign,
              "sign contradicts the action of class '" + c.classes[syn.receptor_class].label + "'");
      }
    }
  }
  for (std::size_t k = 0; k < c.neurons.size(); ++k) {
    if (membership[k] != 1) {
      r.add("neuron-membership", "neuron " + std::to_string(c.neurons[k].id), membership[k],
            "neuron must belong to exactly one n-cell");
    }
  }
}

void check_fields(const Compartment& c, Reporter& r) {
  const std::size_t lattice = c.domain.lattice_size();
  if (c.rho.size() != c.classes.size()) {
    r.add("rho-count", "fields", static_cast<double>(c.rho.size()),
          "one rho field per class is required (" + std::to_string(c.classes.size()) + ")");
  }
  for (std::size_t z = 0; z < c.rho.size(); ++z) {
    const std::string entity = "rho class " + std::to_string(z);
    const auto& f = c.rho[z];
    if (f.size() != lattice) {
      r.add("rho-size", entity, static_cast<double>(f.size()),
            "field has wrong lattice size (expected " + std::to_string(lattice) + ")");
      continue;
    }
    double lo = 0.0, hi = 0.0;
    bool finite = true;
    for (double v : f) {
      finite = finite && std::isfinite(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!finite) r.add("rho-range", entity, NAN, "rho must be finite");
    if (lo < 0.0) r.add("rho-range", entity, lo, "rho must be >= 0 pointwise");
    if (hi > 1.0) {
      r.add("rho-range", entity, hi,
            "rho must be <= 1 pointwise; refine the lattice or enlarge the domain");
    }
    const double integral = lattice_integral(c.domain, f);
    if (!(std::abs(integral - 1.0) <= kDensityTolerance)) {
      r.add("rho-normalization", entity, integral,
            "rho must integrate to 1 over the lattice, measured " + fmt_num(integral));
    }
  }
  if (c.chi.size() != c.ncells.size()) {
    r.add("chi-count", "fields", static_cast<double>(c.chi.size()),
          "one chi field per n-cell is required (" + std::to_string(c.ncells.size()) + ")");
    return;
  }
  bool sizes_ok = true;
  for (std::size_t i = 0; i < c.chi.size(); ++i) {
    const std::string entity = "chi ncell " + std::to_string(c.ncells[i].id);
    if (c.chi[i].size() != lattice) {
      r.add("chi-size", entity, static_cast<double>(c.chi[i].size()),
            "field has wrong lattice size (expected " + std::to_string(lattice) + ")");
      sizes_ok = false;
      continue;
    }
    for (double v : c.chi[i]) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        r.add("chi-range", entity, v, "chi must be finite and >= 0");
        break;
      }
    }
  }
  if (!sizes_ok) return;

  if (c.g.kind == GSpec::Kind::Const && !(c.g.constant > 0.0)) {
    r.add("g-positivity", "g", c.g.constant, "const g must be strictly positive");
    return;
  }
  std::vector<double> chi_at(c.chi.size());
  std::size_t supported = 0;
  double g_max = 0.0;
  for (std::size_t y = 0; y < lattice; ++y) {
    for (std::size_t i = 0; i < c.chi.size(); ++i) chi_at[i] = c.chi[i][y];
    const double gv = c.g(chi_at);
    g_max = std::max(g_max, gv);
    if (gv >= kGZeroGuard) ++supported;
  }
  if (supported == 0) {
    r.add("g-positivity", "g", g_max,
          std::string("g(chi(y)) vanishes at every lattice point (kind ") + to_string(c.g.kind) + ")");
  }
}

}  // namespace

ValidationReport validate_compartment(const Compartment& c) {
  ValidationReport report;
  Reporter r(report);
  check_domain(c.domain, r);
  check_classes(c, r);
  check_neurons(c, r);
  check_ncells(c, r);
  if (c.domain.lattice_size() > 0 && (c.domain.dimension == 2 || c.domain.dimension == 3)) {
    check_fields(c, r);
  }
  return report;
}

std::string structure_checksum(const Compartment& c) {
  Sha256 h;
  h.update("ncell-compartment-v1");
  h.update_i64(c.domain.dimension);
  for (int a = 0; a < 3; ++a) {
    h.update_f64(c.domain.lower[a]).update_f64(c.domain.upper[a]).update_i64(c.domain.resolution[a]);
  }
  h.update_u64(c.classes.size());
  for (const auto& cls : c.classes) {
    h.update_i64(cls.id).update(cls.label).update_f64(cls.synaptic_reversal_mV);
    h.update_u64(cls.is_modulatory ? 1 : 0);
  }
  h.update_u64(c.neurons.size());
  for (const auto& n : c.neurons) {
    h.update_i64(n.id).update_i64(n.class_id).update_i64(n.ncell_id).update_i64(n.node_index);
    for (double p : n.position) h.update_f64(p);
  }
  h.update_u64(c.ncells.size());
  for (const auto& cell : c.ncells) {
    h.update_i64(cell.id).update_u64(cell.node_neurons.size());
    for (int nid : cell.node_neurons) h.update_i64(nid);
    h.update_f64s(cell.psi);
    h.update_u64(cell.synapses.size());
    for (const auto& s : cell.synapses) {
      h.update_i64(s.pre).update_i64(s.post).update_i64(s.receptor_class);
      h.update_f64(s.weight).update_i64(s.sign);
    }
  }
  h.update_u64(c.rho.size());
  for (const auto& f : c.rho) h.update_f64s(f);
  h.update_u64(c.chi.size());
  for (const auto& f : c.chi) h.update_f64s(f);
  h.update(to_string(c.g.kind));
  if (c.g.kind == GSpec::Kind::Const) h.update_f64(c.g.constant);  // unused by the other kinds
  h.update_u64(c.cross_cell_edges ? 1 : 0);
  return h.hex_digest();
}

}  // namespace ncell
