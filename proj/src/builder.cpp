#include "ncell/builder.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <string>

#include "ncell/error.hpp"
#include "ncell/sampling.hpp"

namespace ncell {
namespace {

void check_domain_nonempty(const SpatialDomain& d) {
  if (d.dimension != 2 && d.dimension != 3) {
    throw Error(ErrorCode::DomainEmpty, "domain dimension must be 2 or 3, got " +
                                            std::to_string(d.dimension));
  }
  for (int a = 0; a < d.dimension; ++a) {
    if (!(d.upper[a] > d.lower[a]) || d.resolution[a] < 1) {
      throw Error(ErrorCode::DomainEmpty,
                  "domain axis " + std::to_string(a) + " has no extent or no lattice cells");
    }
  }
}

std::uint64_t class_seed(std::uint64_t base, int class_id) {
  // splitmix64 finaliser keeps per-class streams decorrelated.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(class_id + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Compartment assemble_compartment(const CompartmentDescription& desc) {
  check_domain_nonempty(desc.domain);
  if (desc.ncells.empty()) throw Error(ErrorCode::DomainEmpty, "compartment has no n-cells");

  Compartment c;
  c.domain = desc.domain;
  c.g = desc.g;
  c.cross_cell_edges = desc.cross_cell_edges;

  c.classes = desc.classes;
  std::sort(c.classes.begin(), c.classes.end(), [](auto& a, auto& b) { return a.id < b.id; });
  std::set<int> class_ids;
  for (const auto& cls : c.classes) {
    if (!class_ids.insert(cls.id).second) {
      throw Error(ErrorCode::DuplicateId, "class id " + std::to_string(cls.id) + " is declared twice");
    }
  }
  const auto class_pos = [&](int id) -> long {
    auto it = std::lower_bound(c.classes.begin(), c.classes.end(), id,
                               [](const NeurotransmitterClass& cl, int v) { return cl.id < v; });
    return (it != c.classes.end() && it->id == id) ? it - c.classes.begin() : -1;
  };

  std::vector<const NCellDescription*> cells;
  for (const auto& cd : desc.ncells) cells.push_back(&cd);
  std::sort(cells.begin(), cells.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (std::size_t k = 1; k < cells.size(); ++k) {
    if (cells[k]->id == cells[k - 1]->id) {
      throw Error(ErrorCode::DuplicateId, "n-cell id " + std::to_string(cells[k]->id) + " is declared twice");
    }
  }

  for (const auto* cd : cells) {
    for (std::size_t k = 0; k < cd->nodes.size(); ++k) {
      const auto& node = cd->nodes[k];
      if (class_pos(node.class_id) < 0) {
        throw Error(ErrorCode::UnresolvedReference, "neuron " + std::to_string(node.neuron_id) +
                                                        " references unknown class " +
                                                        std::to_string(node.class_id));
      }
      Neuron n;
      n.id = node.neuron_id;
      n.class_id = node.class_id;
      n.ncell_id = cd->id;
      n.node_index = static_cast<int>(k);
      if (node.position) n.position = *node.position;
      c.neurons.push_back(n);
    }
  }
  std::sort(c.neurons.begin(), c.neurons.end(), [](auto& a, auto& b) { return a.id < b.id; });
  for (std::size_t k = 1; k < c.neurons.size(); ++k) {
    if (c.neurons[k].id == c.neurons[k - 1].id) {
      throw Error(ErrorCode::DuplicateId,
                  "neuron id " + std::to_string(c.neurons[k].id) + " appears in more than one node");
    }
  }

  for (const auto& [z, values] : desc.rho) {
    if (class_pos(z) < 0) {
      throw Error(ErrorCode::UnresolvedReference, "rho field given for unknown class " + std::to_string(z));
    }
  }
  c.rho.resize(c.classes.size());
  for (std::size_t z = 0; z < c.classes.size(); ++z) {
    const auto it = desc.rho.find(c.classes[z].id);
    if (it == desc.rho.end()) {
      throw Error(ErrorCode::UnresolvedReference,
                  "class " + std::to_string(c.classes[z].id) + " has no rho field");
    }
    c.rho[z] = it->second;
  }
  std::set<int> cell_ids;
  for (const auto* cd : cells) cell_ids.insert(cd->id);
  for (const auto& [i, values] : desc.chi) {
    if (!cell_ids.contains(i)) {
      throw Error(ErrorCode::UnresolvedReference, "chi field given for unknown n-cell " + std::to_string(i));
    }
  }

  c.ncells.reserve(cells.size());
  for (const auto* cd : cells) {
    NCell cell;
    cell.id = cd->id;
    for (const auto& node : cd->nodes) {
      cell.node_neurons.push_back(node.neuron_id);
      cell.psi.push_back(node.psi);
    }
    c.ncells.push_back(std::move(cell));
    const auto it = desc.chi.find(cd->id);
    if (it == desc.chi.end()) {
      throw Error(ErrorCode::UnresolvedReference, "n-cell " + std::to_string(cd->id) + " has no chi field");
    }
    c.chi.push_back(it->second);
  }
  c.reindex();

  for (std::size_t k = 0; k < cells.size(); ++k) {
    for (const auto& sd : cells[k]->synapses) {
      for (int end : {sd.pre, sd.post}) {
        if (c.neuron_index(end) < 0) {
          throw Error(ErrorCode::UnresolvedReference,
                      "synapse " + std::to_string(sd.pre) + "->" + std::to_string(sd.post) +
                          " in n-cell " + std::to_string(cells[k]->id) + " references missing neuron " +
                          std::to_string(end));
        }
      }
      Synapse s;
      s.pre = sd.pre;
      s.post = sd.post;
      s.weight = sd.weight;
      s.receptor_class = sd.receptor_class.value_or(c.neurons[c.neuron_index(sd.pre)].class_id);
      const long rc = class_pos(s.receptor_class);
      if (rc < 0) {
        throw Error(ErrorCode::UnresolvedReference, "synapse " + std::to_string(sd.pre) + "->" +
                                                        std::to_string(sd.post) +
                                                        " references unknown receptor class " +
                                                        std::to_string(s.receptor_class));
      }
      const int natural = c.classes[rc].natural_sign();
      if (!sd.sign && natural == 0) {
        throw Error(ErrorCode::UnresolvedReference,
                    "synapse " + std::to_string(sd.pre) + "->" + std::to_string(sd.post) +
                        " of modulatory class '" + c.classes[rc].label + "' needs an explicit sign");
      }
      s.sign = sd.sign.value_or(natural);
      c.ncells[k].synapses.push_back(s);
    }
  }

  // Positions not given verbatim are sampled per class, in neuron id order.
  for (std::size_t z = 0; z < c.classes.size(); ++z) {
    std::vector<std::size_t> pending;
    for (const auto* cd : cells) {
      for (const auto& node : cd->nodes) {
        if (!node.position && node.class_id == c.classes[z].id) {
          pending.push_back(static_cast<std::size_t>(c.neuron_index(node.neuron_id)));
        }
      }
    }
    if (pending.empty()) continue;
    std::sort(pending.begin(), pending.end());
    const auto pos = sample_positions(c.domain, c.rho[z], pending.size(),
                                      class_seed(desc.sampling_seed, c.classes[z].id));
    for (std::size_t k = 0; k < pending.size(); ++k) c.neurons[pending[k]].position = pos[k];
  }
  return c;
}

void require_valid(const Compartment& c) {
  const auto report = validate_compartment(c);
  if (report.empty()) return;
  std::ostringstream os;
  os << report.size() << " violation(s)";
  const std::size_t shown = std::min<std::size_t>(report.size(), 5);
  for (std::size_t k = 0; k < shown; ++k) {
    os << "; [" << report[k].rule << "] " << report[k].entity << ": " << report[k].message;
  }
  throw Error(ErrorCode::InvalidCompartment, os.str());
}

Compartment build_compartment(const CompartmentDescription& desc) {
  auto c = assemble_compartment(desc);
  require_valid(c);
  return c;
}

}  // namespace ncell
