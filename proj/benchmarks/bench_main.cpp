#include <benchmark/benchmark.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "eltd/features.hpp"
#include "eltd/gridmap.hpp"
#include "eltd/wlr_agrnn.hpp"

using namespace eltd;

namespace {

GridMap sparse_map(double cell_deg, int stations) {
  const GridSpec spec(35.9, 36.6, 127.0, 129.6, cell_deg);
  GridMap m{spec, MetFactor::TemperatureC, EpochHour::exact(parse_utc("2023-10-01")),
            std::vector<double>(spec.cell_count(), std::numeric_limits<double>::quiet_NaN()),
            std::vector<std::uint8_t>(spec.cell_count(), 0)};
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> cell(0, spec.cell_count() - 1);
  std::normal_distribution<double> v(12.0, 5.0);
  for (int s = 0; s < stations; ++s) {
    const auto i = cell(rng);
    m.values[i] = v(rng);
    m.assigned[i] = 1;
  }
  return m;
}

void BM_IdwFill(benchmark::State& state) {
  const auto m = sparse_map(0.01, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(idw_fill(m));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.spec.cell_count()));
}
BENCHMARK(BM_IdwFill)->Arg(10)->Arg(40);

void BM_AgrnnPredict(benchmark::State& state) {
  const auto l = static_cast<Eigen::Index>(state.range(0)), T = static_cast<Eigen::Index>(state.range(1));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd bank(l, T);
  for (Eigen::Index i = 0; i < bank.size(); ++i) bank.data()[i] = g(rng);
  std::vector<double> y(static_cast<std::size_t>(T)), q(static_cast<std::size_t>(l)), s(static_cast<std::size_t>(l), 0.8);
  for (auto& v : y) v = g(rng);
  for (auto& v : q) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(wlr_agrnn::agrnn_predict(q, bank, y, s));
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_AgrnnPredict)->Args({20, 1500})->Args({100, 1500});

void BM_PolyExpand(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)), m = static_cast<std::size_t>(state.range(1));
  const PolyTermIndex index(n, m);
  std::vector<double> z(n, 0.3), out(index.size());
  for (auto _ : state) {
    poly_expand_into(z, index, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(index.size()));
}
BENCHMARK(BM_PolyExpand)->Args({7, 3})->Args({11, 4});

}  // namespace

BENCHMARK_MAIN();
