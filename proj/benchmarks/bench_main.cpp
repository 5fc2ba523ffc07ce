#include <benchmark/benchmark.h>

#include <random>

#include "echoform/classify.hpp"
#include "echoform/physics.hpp"
#include "echoform/signal.hpp"

namespace {

using namespace echoform;

ShellTarget bench_target() {
    ShellTarget t;
    t.outer_radius_m = 0.050;
    t.thickness_m = 0.005;
    t.shell = preset_solid("aluminium");
    t.filler = preset_fluid("water");
    t.host = preset_fluid("water");
    return t;
}

void BM_FormFunctionShell(benchmark::State& state) {
    const ShellTarget target = bench_target();
    const int n = static_cast<int>(state.range(0));
    std::vector<double> freqs(n);
    for (int i = 0; i < n; ++i) freqs[i] = 30.0e3 + (160.0e3 - 30.0e3) * i / (n - 1);
    for (auto _ : state) {
        FormFunction ff = form_function_shell(target, freqs);
        benchmark::DoNotOptimize(ff.values.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FormFunctionShell)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MatchedFilter(benchmark::State& state) {
    const Waveform pulse = make_chirp(160.0e3, 30.0e3, 1.0e-3, 1.0e6);
    Waveform rec;
    rec.sample_rate_hz = 1.0e6;
    rec.samples.resize(static_cast<std::size_t>(state.range(0)));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (auto& v : rec.samples) v = nd(rng);
    for (auto _ : state) {
        Waveform out = matched_filter(rec, pulse);
        benchmark::DoNotOptimize(out.samples.data());
    }
}
BENCHMARK(BM_MatchedFilter)->Arg(30000)->Unit(benchmark::kMillisecond);

void BM_MLPForward(benchmark::State& state) {
    const MLPModel model = make_mlp({512, 256, 128, 64, 32, 1}, 42);
    Eigen::VectorXd x = Eigen::VectorXd::Random(512);
    for (auto _ : state) {
        double p = mlp_forward(model, x, ForwardMode::infer);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_MLPForward);

}  // namespace

BENCHMARK_MAIN();
