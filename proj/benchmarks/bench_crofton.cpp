#include <benchmark/benchmark.h>

#include "finsler/linespace.hpp"
#include "finsler/oval.hpp"

namespace {

void CroftonCircle(benchmark::State& state) {
    finsler::CircleOval circle(1.0);
    int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        double len = finsler::crofton_length(circle, nullptr, n, n);
        benchmark::DoNotOptimize(len);
    }
}
BENCHMARK(CroftonCircle)->Arg(256)->Arg(1024);

}  // namespace
