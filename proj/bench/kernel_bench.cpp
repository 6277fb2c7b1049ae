#include <benchmark/benchmark.h>

#include <vector>

#include "hedonia/kernels.hpp"
#include "hedonia/rng.hpp"

using namespace hedonia;
using kernels::ConvDims;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

template <typename F>
void conv_forward_bench(benchmark::State& state, F fn) {
    const ConvDims d{4, static_cast<std::size_t>(state.range(0)),
                     static_cast<std::size_t>(state.range(0)), 8, 16};
    const auto in = random_vec(d.n * d.h * d.w * d.cin, 1);
    const auto w = random_vec(d.cout * 9 * d.cin, 2);
    const auto b = random_vec(d.cout, 3);
    std::vector<double> out(d.n * d.h * d.w * d.cout);
    for (auto _ : state) {
        fn(in.data(), d, w.data(), b.data(), out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * d.n * d.h * d.w * d.cout * 9 *
                            d.cin);
}

template <typename F>
void dense_forward_bench(benchmark::State& state, F fn) {
    const std::size_t n = 64, din = static_cast<std::size_t>(state.range(0)),
                      dout = 128;
    const auto in = random_vec(n * din, 1);
    const auto w = random_vec(dout * din, 2);
    const auto b = random_vec(dout, 3);
    std::vector<double> out(n * dout);
    for (auto _ : state) {
        fn(in.data(), n, din, w.data(), b.data(), dout, out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * n * din * dout);
}

template <typename F>
void pool_forward_bench(benchmark::State& state, F fn) {
    const std::size_t n = 8, side = static_cast<std::size_t>(state.range(0)),
                      c = 16;
    const auto in = random_vec(n * side * side * c, 1);
    std::vector<double> out(n * (side / 2) * (side / 2) * c);
    std::vector<std::uint32_t> argmax(out.size());
    for (auto _ : state) {
        fn(in.data(), n, side, side, c, out.data(), argmax.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * in.size());
}

void bm_conv_serial(benchmark::State& s) {
    conv_forward_bench(s, kernels::serial::conv3x3_forward);
}
void bm_conv_omp(benchmark::State& s) {
    conv_forward_bench(s, kernels::omp::conv3x3_forward);
}
void bm_dense_serial(benchmark::State& s) {
    dense_forward_bench(s, kernels::serial::dense_forward);
}
void bm_dense_omp(benchmark::State& s) {
    dense_forward_bench(s, kernels::omp::dense_forward);
}
void bm_pool_serial(benchmark::State& s) {
    pool_forward_bench(s, kernels::serial::maxpool2x2_forward);
}
void bm_pool_omp(benchmark::State& s) {
    pool_forward_bench(s, kernels::omp::maxpool2x2_forward);
}

}  // namespace

BENCHMARK(bm_conv_serial)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(bm_conv_omp)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(bm_dense_serial)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(bm_dense_omp)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(bm_pool_serial)->Arg(64)->Arg(128);
BENCHMARK(bm_pool_omp)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
