// SPDX-License-Identifier: Apache-2.0
#include <numbers>

#include <benchmark/benchmark.h>

#include "rough/billiard2d.hpp"
#include "rough/diskwall.hpp"
#include "rough/kernels.hpp"

using namespace rough;

namespace {

constexpr double pi = std::numbers::pi;

WallSpec spec_of(Family f) {
    WallSpec s;
    s.family = f;
    s.r = 1.0;
    s.psi = 1.0;
    s.xi = pi / 3;
    s.axis_ratio = 0.6;
    s.depth = 0.2;
    return s;
}

void BM_macro_reflection(benchmark::State& state) {
    const Wall wall = build_wall(spec_of(static_cast<Family>(state.range(0))));
    std::uint64_t i = 0;
    for (auto _ : state) {
        Stream rng(1, i++);
        const MacroResult m = macro_reflection(wall, {rng.uniform() * wall.period(), rng.uniform_open() * pi});
        benchmark::DoNotOptimize(m);
    }
    state.SetLabel(family_name(wall.spec().family));
}
BENCHMARK(BM_macro_reflection)->DenseRange(0, 4);

void BM_kernel_sample(benchmark::State& state) {
    const Kernel kernels[] = {Kernel::lambertian(), Kernel::rect(1.0), Kernel::tri(1.0), Kernel::circ(pi / 3)};
    const Kernel& k = kernels[state.range(0)];
    std::uint64_t i = 0;
    for (auto _ : state) {
        Stream rng(2, i++);
        benchmark::DoNotOptimize(k.sample(rng.uniform_open() * pi, rng));
    }
    state.SetLabel(k.name());
}
BENCHMARK(BM_kernel_sample)->DenseRange(0, 3);

template <bool Cyl>
void BM_collide(benchmark::State& state) {
    const double eps = 1.0 / static_cast<double>(state.range(0));
    WallSpec s = spec_of(Family::rect_teeth);
    s.scale = eps;
    s.datum = Datum::disk_wall;
    const Wall wall = build_wall(s);
    const DiskParams p = DiskParams::from_rule(1.0, 1.0, eps);
    std::uint64_t i = 0;
    for (auto _ : state) {
        Stream rng(3, i++);
        const ConfigState in = random_incoming(wall, p, rng.uniform_open() * pi, 0.2 + 2.7 * rng.uniform(), rng);
        const CollisionResult r = Cyl ? collide_cyl(wall, p, in) : collide(wall, p, in);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_collide<false>)->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK(BM_collide<true>)->Arg(10)->Arg(100)->Arg(1000);

void BM_averaged_kernel(benchmark::State& state) {
    const WallSpec s = spec_of(Family::tri_teeth);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(averaged_kernel(s, 1.1, n, seed++));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_averaged_kernel)->Arg(10'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
