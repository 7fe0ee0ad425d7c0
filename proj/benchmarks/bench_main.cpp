#include <benchmark/benchmark.h>

#include "radiofine/calibrate.hpp"
#include "radiofine/evaluate.hpp"
#include "radiofine/finedate.hpp"
#include "radiofine/reftable.hpp"
#include "radiofine/simulate.hpp"

using namespace radiofine;

namespace {

const CalCurve& curve() {
    static const CalCurve c = load_curve_file(RADIOFINE_CURVE_FILE);
    return c;
}

const Simulator& sim() {
    static const Simulator s(curve());
    return s;
}

const RefTable& table_5_20_5() {
    static const RefTable t = [] {
        auto spec = table1_preset("5_20_5");
        spec.seed = 5;
        return build_reference_table(sim(), spec);
    }();
    return t;
}

}  // namespace

static void BM_Calibrate(benchmark::State& state) {
    const auto& cal = sim().calibrator();
    int age = 1950;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cal.calibrate({age, 20}));
        age = age >= 2300 ? 1950 : age + 7;
    }
}
BENCHMARK(BM_Calibrate);

static void BM_CalibratorSetup(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(Calibrator(curve()));
}
BENCHMARK(BM_CalibratorSetup)->Unit(benchmark::kMillisecond);

static void BM_BuildTable(benchmark::State& state) {
    auto spec = table1_preset("5_20_5");
    spec.seed = 5;
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_reference_table(sim(), spec, workers));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(spec.record_count()));
}
BENCHMARK(BM_BuildTable)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_FineDate(benchmark::State& state) {
    const AgeIndex index(table_5_20_5());
    const std::vector<Measurement> ms = {{2073, 20}, {2087, 20}, {2097, 20}};
    for (auto _ : state) benchmark::DoNotOptimize(compute_indicators(match_measurements(index, ms)));
}
BENCHMARK(BM_FineDate);

static void BM_EvaluateSeries(benchmark::State& state) {
    TestSeriesParams p;
    p.dates = parse_date_range("-300:0:5");
    p.datasets_per_date = 10;
    p.seed = 11;
    const auto datasets = generate_test_datasets(sim(), p);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_test_series(table_5_20_5(), datasets));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(datasets.size()));
}
BENCHMARK(BM_EvaluateSeries)->Unit(benchmark::kMillisecond);

static void BM_MpdSearch(benchmark::State& state) {
    std::vector<double> pool;
    for (const auto& r : table_5_20_5().records) pool.push_back(r.base_date);  // 5-year grid: never empty within 10
    const ReferencePool ref(pool);
    double x = -250;  // well inside the table span
    for (auto _ : state) {
        benchmark::DoNotOptimize(ref.search(x));
        x = x >= -50 ? -250 : x + 1;
    }
}
BENCHMARK(BM_MpdSearch);
BENCHMARK_MAIN();
