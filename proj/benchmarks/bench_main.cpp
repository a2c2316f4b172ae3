#include <benchmark/benchmark.h>

#include "shimura/tables.hpp"

using namespace shimura;

static void BM_SiegelZeta(benchmark::State& state) {
    for (auto _ : state) {
        Rat sum = 0;
        for (Int d = 5; d <= 853; ++d)
            if (is_fundamental_discriminant(d)) sum += zeta_minus1(d);
        benchmark::DoNotOptimize(sum);
    }
}
BENCHMARK(BM_SiegelZeta);

static void BM_MakeField(benchmark::State& state) {
    Int d = state.range(0);
    for (auto _ : state) {
        BaseField F = make_field(d);
        benchmark::DoNotOptimize(F.h_plus);
    }
}
BENCHMARK(BM_MakeField)->Arg(5)->Arg(229)->Arg(853);

static void BM_CMField(benchmark::State& state) {
    BaseField F = make_field(state.range(0));
    for (auto _ : state) {
        CMField K = cm_field(F, 2);
        benchmark::DoNotOptimize(K.h_K);
    }
}
BENCHMARK(BM_CMField)->Arg(5)->Arg(40)->Arg(172);

static void BM_EnumerateDegree1(benchmark::State& state) {
    BaseField Q = make_field(1);
    for (auto _ : state) {
        CMCache cache;
        auto recs = enumerate_all(cache, Q, 2);
        benchmark::DoNotOptimize(recs.size());
    }
}
BENCHMARK(BM_EnumerateDegree1);

static void BM_EnumerateField(benchmark::State& state) {
    BaseField F = make_field(state.range(0));
    for (auto _ : state) {
        CMCache cache;
        auto recs = enumerate_all(cache, F, 2);
        benchmark::DoNotOptimize(recs.size());
    }
}
BENCHMARK(BM_EnumerateField)->Arg(5)->Arg(8)->Arg(12);

static void BM_FullDegree2(benchmark::State& state) {
    auto discs = field_scan(2).discs;
    for (auto _ : state) {
        size_t n = 0;
        for (Int d : discs) {
            BaseField F = make_field(d);
            CMCache cache;
            n += enumerate_all(cache, F, 2).size();
        }
        benchmark::DoNotOptimize(n);
    }
}
BENCHMARK(BM_FullDegree2)->Unit(benchmark::kMillisecond);

static void BM_ParseGolden(benchmark::State& state) {
    for (auto _ : state) {
        auto rows = parse_tables(default_golden_path());
        benchmark::DoNotOptimize(rows.size());
    }
}
BENCHMARK(BM_ParseGolden);

BENCHMARK_MAIN();
