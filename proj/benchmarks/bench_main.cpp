#include <benchmark/benchmark.h>

#include <random>

#include "pctnpi/engine.hpp"

using namespace pctnpi;

namespace {

LabeledTensor random_tensor(std::vector<IndexLabel> legs, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  return LabeledTensor::generate(std::move(legs), [&](auto) { return cplx(g(rng), g(rng)); });
}

BathConfig fig7_bath() { return BathConfig{1.0, 0.125, EndpointPolicy::stationary, 1e-12}; }

CMatrix up() {
  CMatrix r = CMatrix::Zero(2, 2);
  r(0, 0) = 1.0;
  return r;
}

// Running tensor (D^2 x B^(L-1)) joined with a rank-3 influence node, as in one step of a sweep.
void BM_ContractRunningWithInfluence(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  std::vector<IndexLabel> run_legs = {{"s", 4}};
  for (int i = 0; i < l - 1; ++i) run_legs.push_back({"d" + std::to_string(i), 3});
  const auto running = random_tensor(run_legs, 1);
  const auto node = random_tensor({{"d0", 3}, {"s", 4}, {"x", 3}}, 2);
  OpCounter c;
  for (auto _ : state) {
    auto r = contract(running, node, c);
    benchmark::DoNotOptimize(r.data().data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(c.multiply_adds));
}
BENCHMARK(BM_ContractRunningWithInfluence)->DenseRange(4, 12, 2)->Unit(benchmark::kMicrosecond);

void BM_ComputeEta(benchmark::State& state) {
  const auto sd = SpectralDensity::ohmic_exponential(2.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(compute_eta(sd, fig7_bath(), static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ComputeEta)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BuildNetwork(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto spec = SystemSpec::tls(0.0, 1.0);
  const auto prop = short_time_propagator(spec, 0.125);
  const auto basis = difference_basis(spec);
  const auto eta = compute_eta(SpectralDensity::ohmic_exponential(2.0, 1.0), fig7_bath(), n);
  for (auto _ : state) benchmark::DoNotOptimize(build_network({n, 8, Mode::full}, prop, basis, eta).tensor_count());
}
BENCHMARK(BM_BuildNetwork)->Arg(20)->Arg(40)->Unit(benchmark::kMicrosecond);

void BM_PropagateIterative(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  const auto spec = SystemSpec::tls(0.0, 1.0);
  const auto prop = short_time_propagator(spec, 0.125);
  const auto basis = difference_basis(spec);
  const auto eta = compute_eta(SpectralDensity::ohmic_exponential(2.0, 1.0), fig7_bath(), 24);
  const auto net = build_network({24, l, Mode::full}, prop, basis, eta);
  std::uint64_t peak = 0;
  for (auto _ : state) peak = propagate_iterative(net, up()).report.peak_elements;
  state.counters["peak_elements"] = static_cast<double>(peak);
}
BENCHMARK(BM_PropagateIterative)->DenseRange(4, 10, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
