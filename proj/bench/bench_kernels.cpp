// Serial reference vs OpenMP kernels on a striatum-sized network.
//   ./bench_kernels --benchmark_filter=Step

#include <benchmark/benchmark.h>

#include <cmath>
#include <map>

#include "ncell/averaging.hpp"
#include "ncell/dynamics.hpp"
#include "ncell/striatum.hpp"

namespace {

const ncell::striatum::StriatumModel& model(int total) {
  static std::map<int, ncell::striatum::StriatumModel> cache;
  auto it = cache.find(total);
  if (it == cache.end()) {
    ncell::striatum::StriatumParams p;
    p.total_neurons = total;
    it = cache.emplace(total, ncell::striatum::build_striatum_model(p)).first;
  }
  return it->second;
}

// Warm state: a few ms of drive so spikes and synaptic gates are live.
struct Warm {
  ncell::Network net;
  ncell::NetworkState state;
  std::vector<double> current;
};

Warm warm(int total) {
  const auto& m = model(total);
  Warm w{ncell::Network(m.compartment, m.dynamics), {}, {}};
  w.state = ncell::resting_network_state(w.net);
  w.current.assign(w.net.size(), 0.0);
  for (std::size_t i = 0; i < w.current.size(); i += 7) w.current[i] = 10.0;
  for (int k = 0; k < 400; ++k) ncell::step_network(w.net, w.state, k * 0.025, 0.025, w.current);
  return w;
}

void BM_StepSerial(benchmark::State& st) {
  auto w = warm(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    ncell::step_network_serial(w.net, w.state, 10.0, 0.025, w.current);
    benchmark::DoNotOptimize(w.state.y.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_StepOpenMP(benchmark::State& st) {
  auto w = warm(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    ncell::step_network(w.net, w.state, 10.0, 0.025, w.current, static_cast<int>(st.range(1)));
    benchmark::DoNotOptimize(w.state.y.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_WeightsSerial(benchmark::State& st) {
  const auto& m = model(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(ncell::precompute_weights_serial(m.compartment));
}

void BM_WeightsOpenMP(benchmark::State& st) {
  const auto& m = model(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(ncell::precompute_weights(m.compartment, static_cast<int>(st.range(1))));
}

ncell::SimulationRecord synthetic_record(const ncell::Compartment& c, std::size_t rows) {
  ncell::SimulationRecord r;
  for (const auto& n : c.neurons) r.neuron_ids.push_back(n.id);
  for (std::size_t k = 0; k < rows; ++k) {
    r.times.push_back(static_cast<double>(k));
    for (std::size_t i = 0; i < r.neuron_ids.size(); ++i) r.u.push_back(std::sin(0.01 * static_cast<double>(k * i)));
  }
  return r;
}

void BM_TraceSerial(benchmark::State& st) {
  const auto& m = model(static_cast<int>(st.range(0)));
  const auto w = ncell::precompute_weights(m.compartment);
  const auto rec = synthetic_record(m.compartment, 2000);
  for (auto _ : st) benchmark::DoNotOptimize(ncell::average_trace_serial(w, rec));
}

void BM_TraceOpenMP(benchmark::State& st) {
  const auto& m = model(static_cast<int>(st.range(0)));
  const auto w = ncell::precompute_weights(m.compartment);
  const auto rec = synthetic_record(m.compartment, 2000);
  for (auto _ : st) benchmark::DoNotOptimize(ncell::average_trace(w, rec, static_cast<int>(st.range(1))));
}

}  // namespace

BENCHMARK(BM_StepSerial)->Arg(1600)->Arg(6400);
BENCHMARK(BM_StepOpenMP)->ArgsProduct({{1600, 6400}, {1, 2, 4}});
BENCHMARK(BM_WeightsSerial)->Arg(1600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeightsOpenMP)->ArgsProduct({{1600}, {1, 2, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TraceSerial)->Arg(1600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TraceOpenMP)->ArgsProduct({{1600}, {1, 2, 4}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
