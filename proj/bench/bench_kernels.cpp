#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "frfm/features.hpp"
#include "frfm/metrics.hpp"
#include "frfm/synthesis.hpp"

using namespace frfm;

namespace {

ModalParameter mode_at(double f_hz, double xi, double peak_db) {
    const double omega = 2.0 * std::numbers::pi * f_hz;
    return ModalParameter{omega, xi, std::pow(10.0, peak_db / 20.0) * 2.0 * xi * omega * omega};
}

ModalModel ten_modes() {
    ModalModel m;
    const double f[] = {200, 350, 520, 760, 1040, 1380, 1800, 2250, 2700, 2950};
    for (int i = 0; i < 10; ++i) m.modes.push_back(mode_at(f[i], 0.01 + 0.001 * i, 8.0 + i % 5));
    return m;
}

std::vector<LabeledSeries> synthetic_dataset(std::size_t members, std::size_t bins) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> shift(0.99, 1.01);
    std::vector<LabeledSeries> out;
    for (std::size_t i = 0; i < members; ++i) {
        ModalModel m = ten_modes();
        for (ModalParameter& p : m.modes) p.omega_r *= shift(rng);
        out.push_back({"m" + std::to_string(i),
                       synthesize_frf(m, GridSpec{0.0, 0.3, bins}, Exec::parallel)});
    }
    return out;
}

Matrix random_rows(std::size_t rows, std::size_t cols) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(rows, cols);
    for (double& v : m.a) v = u(rng);
    return m;
}

void bm_synthesize(benchmark::State& state, Exec exec) {
    const ModalModel model = ten_modes();
    const GridSpec grid{0.0, 0.125, static_cast<std::size_t>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(synthesize_frf(model, grid, exec));
}

void bm_subspace_distance(benchmark::State& state, Exec exec) {
    const Matrix normalized = zscore_normalize(random_rows(static_cast<std::size_t>(state.range(0)), 10));
    for (auto _ : state) benchmark::DoNotOptimize(subspace_distance(normalized, {}, exec));
}

void bm_mse_matrix(benchmark::State& state, Exec exec) {
    const auto dataset = synthetic_dataset(static_cast<std::size_t>(state.range(0)), 12001);
    for (auto _ : state) benchmark::DoNotOptimize(mse_matrix(dataset, std::nullopt, exec));
}

void bm_extract_rows(benchmark::State& state, Exec exec) {
    const auto dataset = synthetic_dataset(static_cast<std::size_t>(state.range(0)), 12001);
    PeakConfig cfg;
    cfg.n_peaks = 10;
    for (auto _ : state) benchmark::DoNotOptimize(build_feature_matrices(dataset, cfg, exec));
}

}  // namespace

BENCHMARK_CAPTURE(bm_synthesize, serial, Exec::serial)->Arg(6001)->Arg(48001)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_synthesize, parallel, Exec::parallel)->Arg(6001)->Arg(48001)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_subspace_distance, serial, Exec::serial)->Arg(64)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_subspace_distance, parallel, Exec::parallel)->Arg(64)->Arg(512)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_mse_matrix, serial, Exec::serial)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_mse_matrix, parallel, Exec::parallel)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_extract_rows, serial, Exec::serial)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_extract_rows, parallel, Exec::parallel)->Arg(24)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
