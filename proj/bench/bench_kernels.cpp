// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "ncderp/dsp.hpp"
#include "ncderp/encode.hpp"
#include "ncderp/ncd.hpp"
#include "ncderp/recording.hpp"

namespace {

using namespace ncderp;

const Recording& bench_recording() {
    static const Recording rec = [] {
        SynthesisConfig cfg;
        cfg.n_characters = 6;
        cfg.n_channels = 16;
        cfg.rng_seed = 3;
        return synthesize(cfg);
    }();
    return rec;
}

const std::vector<AsciiObject>& bench_objects() {
    static const std::vector<AsciiObject> objects = [] {
        const Recording rec = standardize(bandpass(bench_recording(), {}));
        const auto segs = extract_segments(rec, rec.channels.front());
        return build_objects(segs, {4, 4, 64, 3.0, 11}, 10);
    }();
    return objects;
}

void BM_BandpassSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(serial::bandpass(bench_recording(), {}));
}

void BM_BandpassParallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(bandpass(bench_recording(), {}));
}

void BM_DistanceMatrixSerial(benchmark::State& state) {
    const auto c = make_compressor(state.range(0) == 0 ? "zlib" : "bwt");
    for (auto _ : state) benchmark::DoNotOptimize(serial::distance_matrix(bench_objects(), *c));
}

void BM_DistanceMatrixParallel(benchmark::State& state) {
    const auto c = make_compressor(state.range(0) == 0 ? "zlib" : "bwt");
    for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(bench_objects(), *c));
}

}  // namespace

BENCHMARK(BM_BandpassSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BandpassParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistanceMatrixSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistanceMatrixParallel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
