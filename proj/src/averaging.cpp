#include "ncell/averaging.hpp"

#include <omp.h>

#include <algorithm>
#include <string>

#include "ncell/builder.hpp"
#include "ncell/error.hpp"

namespace ncell {
namespace {

// g(chi(y)) per lattice point; values under the zero guard become 0.
std::vector<double> normaliser_field(const Compartment& c) {
  const std::size_t lattice = c.domain.lattice_size();
  std::vector<double> g(lattice);
  std::vector<double> chi_at(c.chi.size());
  for (std::size_t y = 0; y < lattice; ++y) {
    for (std::size_t i = 0; i < c.chi.size(); ++i) chi_at[i] = c.chi[i][y];
    const double gv = c.g(chi_at);
    g[y] = gv < kGZeroGuard ? 0.0 : gv;
  }
  return g;
}

double class_cell_coefficient(const Compartment& c, const std::vector<double>& g, std::size_t z,
                              std::size_t i) {
  const double cells = static_cast<double>(c.ncells.size());
  const auto& rho = c.rho[z];
  const auto& chi = c.chi[i];
  double sum = 0.0;
  for (std::size_t y = 0; y < g.size(); ++y) {
    if (g[y] == 0.0) continue;
    sum += rho[y] * (chi[y] / (cells * g[y]));
  }
  return sum * c.domain.cell_volume();
}

AveragingWeights assemble(const Compartment& c, const std::vector<double>& coef) {
  const std::size_t cells = c.ncells.size();
  AveragingWeights out;
  out.g_kind = c.g.kind;
  out.resolution = c.domain.resolution;
  out.checksum = structure_checksum(c);
  out.neuron_ids.reserve(c.neurons.size());
  out.w.reserve(c.neurons.size());
  for (const auto& n : c.neurons) {
    const auto i = static_cast<std::size_t>(c.ncell_index(n.ncell_id));
    const double psi = c.ncells[i].psi[n.node_index];
    out.neuron_ids.push_back(n.id);
    out.w.push_back(psi * coef[static_cast<std::size_t>(n.class_id) * cells + i]);
  }
  return out;
}

}  // namespace

double AveragingWeights::weight_of(int neuron_id) const {
  const auto it = std::lower_bound(neuron_ids.begin(), neuron_ids.end(), neuron_id);
  if (it == neuron_ids.end() || *it != neuron_id) {
    throw Error(ErrorCode::MissingNeuron, "no weight for neuron " + std::to_string(neuron_id));
  }
  return w[static_cast<std::size_t>(it - neuron_ids.begin())];
}

AveragingWeights precompute_weights(const Compartment& c, int threads) {
  require_valid(c);
  const auto g = normaliser_field(c);
  const std::size_t classes = c.classes.size();
  const std::size_t cells = c.ncells.size();
  std::vector<double> coef(classes * cells);
  const long pairs = static_cast<long>(coef.size());
  const int workers = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long k = 0; k < pairs; ++k) {
    coef[k] = class_cell_coefficient(c, g, static_cast<std::size_t>(k) / cells,
                                     static_cast<std::size_t>(k) % cells);
  }
  return assemble(c, coef);
}

AveragingWeights precompute_weights_serial(const Compartment& c) {
  require_valid(c);
  const auto g = normaliser_field(c);
  const std::size_t cells = c.ncells.size();
  std::vector<double> coef(c.classes.size() * cells);
  for (std::size_t k = 0; k < coef.size(); ++k) coef[k] = class_cell_coefficient(c, g, k / cells, k % cells);
  return assemble(c, coef);
}

double average(const AveragingWeights& wts, const std::map<int, double>& u_snapshot) {
  double v = 0.0;
  for (std::size_t k = 0; k < wts.neuron_ids.size(); ++k) {
    const auto it = u_snapshot.find(wts.neuron_ids[k]);
    if (it == u_snapshot.end()) {
      if (wts.w[k] == 0.0) continue;
      throw Error(ErrorCode::MissingNeuron,
                  "snapshot has no potential for neuron " + std::to_string(wts.neuron_ids[k]));
    }
    v += wts.w[k] * it->second;
  }
  return v;
}

double average(const AveragingWeights& wts, std::span<const double> u_aligned) {
  if (u_aligned.size() != wts.w.size()) {
    throw Error(ErrorCode::ShapeMismatch, "snapshot has " + std::to_string(u_aligned.size()) +
                                              " values for " + std::to_string(wts.w.size()) + " weights");
  }
  double v = 0.0;
  for (std::size_t k = 0; k < wts.w.size(); ++k) v += wts.w[k] * u_aligned[k];
  return v;
}

double average_naive(const Compartment& c, const std::map<int, double>& u_snapshot) {
  require_valid(c);
  const std::size_t lattice = c.domain.lattice_size();
  const double cells = static_cast<double>(c.ncells.size());
  const double dy = c.domain.cell_volume();
  std::vector<double> chi_at(c.chi.size());

  const auto potential = [&](int id) {
    const auto it = u_snapshot.find(id);
    if (it == u_snapshot.end()) {
      throw Error(ErrorCode::MissingNeuron, "snapshot has no potential for neuron " + std::to_string(id));
    }
    return it->second;
  };

  double v = 0.0;
  for (std::size_t z = 0; z < c.classes.size(); ++z) {
    const int class_id = c.classes[z].id;
    double integral = 0.0;
    for (std::size_t y = 0; y < lattice; ++y) {
      for (std::size_t i = 0; i < c.chi.size(); ++i) chi_at[i] = c.chi[i][y];
      const double gy = c.g(chi_at);
      if (gy < kGZeroGuard) continue;
      double over_cells = 0.0;
      for (std::size_t i = 0; i < c.ncells.size(); ++i) {
        const auto& cell = c.ncells[i];
        double local = 0.0;
        for (std::size_t x = 0; x < cell.node_neurons.size(); ++x) {
          const int nid = cell.node_neurons[x];
          if (c.neurons[c.neuron_index(nid)].class_id != class_id) continue;
          if (cell.psi[x] == 0.0) continue;
          local += cell.psi[x] * potential(nid);
        }
        over_cells += c.chi[i][y] * local;
      }
      integral += c.rho[z][y] * over_cells / (cells * gy) * dy;
    }
    v += integral;
  }
  return v;
}

std::vector<double> average_trace(const AveragingWeights& wts, const SimulationRecord& record, int threads) {
  if (record.neuron_ids != wts.neuron_ids) {
    throw Error(ErrorCode::ShapeMismatch, "record columns do not match the averaging weights");
  }
  std::vector<double> v(record.rows());
  const long rows = static_cast<long>(record.rows());
  const int workers = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long r = 0; r < rows; ++r) v[r] = average(wts, record.row(static_cast<std::size_t>(r)));
  return v;
}

std::vector<double> average_trace_serial(const AveragingWeights& wts, const SimulationRecord& record) {
  if (record.neuron_ids != wts.neuron_ids) {
    throw Error(ErrorCode::ShapeMismatch, "record columns do not match the averaging weights");
  }
  std::vector<double> v(record.rows());
  for (std::size_t r = 0; r < record.rows(); ++r) v[r] = average(wts, record.row(r));
  return v;
}

}  // namespace ncell
