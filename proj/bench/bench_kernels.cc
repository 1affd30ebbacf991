// Copyright 2026 The lsd-drt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Parallel kernels against their single-threaded references.

#include <benchmark/benchmark.h>

#include <random>

#include "lsd/estimate_bayes.h"
#include "lsd/estimate_freq.h"
#include "lsd/parallel.h"
#include "lsd/presets.h"
#include "lsd/simulator.h"
#include "lsd/transform.h"

namespace {

using namespace lsd;

const Experiment &table1() {
    static const Experiment exp(preset_config("lsd_211_tableI"));
    return exp;
}

const ShotTable &table1_shots() {
    static const ShotTable table = [] {
        const auto &exp = table1();
        return build_shot_table(run_experiment(exp), exp.code(), exp.settings());
    }();
    return table;
}

void BM_RunExperiment(benchmark::State &state) {
    const auto &exp = table1();
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_experiment(exp));
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * exp.total_shots()));
}
BENCHMARK(BM_RunExperiment)->Unit(benchmark::kMillisecond);

void BM_RunExperimentSerial(benchmark::State &state) {
    const auto &exp = table1();
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_experiment_serial(exp));
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * exp.total_shots()));
}
BENCHMARK(BM_RunExperimentSerial)->Unit(benchmark::kMillisecond);

std::vector<double> random_dense(int n) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> v(size_t{1} << (2 * n));
    for (auto &x : v) {
        x = u(gen);
    }
    return v;
}

void BM_Wht(benchmark::State &state) {
    int n = static_cast<int>(state.range(0));
    auto v = random_dense(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(walsh_hadamard_full(v, n, TransformDirection::kToEigenvalues, n));
    }
}
BENCHMARK(BM_Wht)->DenseRange(4, 10, 2);

void BM_WhtSerial(benchmark::State &state) {
    int n = static_cast<int>(state.range(0));
    auto v = random_dense(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(walsh_hadamard_full_serial(v, n, TransformDirection::kToEigenvalues, n));
    }
}
BENCHMARK(BM_WhtSerial)->DenseRange(4, 10, 2);

// Argument is the thread cap; 1 is the serial reference.
void BM_Bootstrap(benchmark::State &state) {
    set_thread_count(static_cast<int>(state.range(0)));
    FreqOptions wls;
    wls.nonlinear = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bootstrap(table1_shots(), 200, 3, wls));
    }
    set_thread_count(omp_get_num_procs());
}
BENCHMARK(BM_Bootstrap)->DenseRange(1, omp_get_num_procs())->Unit(benchmark::kMillisecond);

void BM_Chains(benchmark::State &state) {
    set_thread_count(static_cast<int>(state.range(0)));
    auto models = build_models(table1_shots(), BayesModelSpec{});
    SamplerOptions so;
    so.warmup = 500;
    so.samples = 500;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_posteriors(models, so));
    }
    set_thread_count(omp_get_num_procs());
}
BENCHMARK(BM_Chains)->DenseRange(1, omp_get_num_procs())->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
