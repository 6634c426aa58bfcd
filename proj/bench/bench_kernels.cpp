/*
 * Copyright 2026 The ulsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ulsim/kernels.hpp"
#include "ulsim/model.hpp"

namespace {

using namespace ulsim;

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(gen);
  return v;
}

template <bool kParallel>
void BM_DenseForward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t in = 20, out = 32;
  const auto w = noise(in * out, 1), b = noise(out, 2), x = noise(rows * in, 3);
  std::vector<double> y(rows * out);
  for (auto _ : state) {
    if constexpr (kParallel)
      kernels::parallel::dense_forward(w, b, x, rows, in, out, y);
    else
      kernels::serial::dense_forward(w, b, x, rows, in, out, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}
BENCHMARK(BM_DenseForward<false>)->Arg(32)->Arg(3000)->Arg(30000);
BENCHMARK(BM_DenseForward<true>)->Arg(32)->Arg(3000)->Arg(30000);

template <bool kParallel>
void BM_DenseBackwardParams(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t in = 20, out = 32;
  const auto dout = noise(rows * out, 1), x = noise(rows * in, 2);
  std::vector<double> gw(in * out), gb(out);
  for (auto _ : state) {
    if constexpr (kParallel)
      kernels::parallel::dense_backward_params(dout, x, rows, in, out, gw, gb);
    else
      kernels::serial::dense_backward_params(dout, x, rows, in, out, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
}
BENCHMARK(BM_DenseBackwardParams<false>)->Arg(32)->Arg(3000)->Arg(30000);
BENCHMARK(BM_DenseBackwardParams<true>)->Arg(32)->Arg(3000)->Arg(30000);

template <bool kParallel>
void BM_WeightedSum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<double>> locals;
  for (int i = 0; i < 10; ++i) locals.push_back(noise(n, 10 + i));
  std::vector<std::span<const double>> views(locals.begin(), locals.end());
  const std::vector<double> w(10, 0.1);
  std::vector<double> out(n);
  for (auto _ : state) {
    if constexpr (kParallel)
      kernels::parallel::weighted_sum(views, w, out);
    else
      kernels::serial::weighted_sum(views, w, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_WeightedSum<false>)->Arg(1002)->Arg(100000);
BENCHMARK(BM_WeightedSum<true>)->Arg(1002)->Arg(100000);

template <Exec kExec>
void BM_LossAndGrad(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto layout = LayerLayout::make({20, 32, 10});
  const ParamVector p = init_params(layout, 1);
  Batch b;
  b.inputs = Matrix(rows, 20);
  b.inputs.data = noise(rows * 20, 2);
  for (std::size_t i = 0; i < rows; ++i) b.labels.push_back(static_cast<int>(i % 10));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(p, b, kExec).loss);
}
BENCHMARK(BM_LossAndGrad<Exec::kSerial>)->Arg(32)->Arg(3000);
BENCHMARK(BM_LossAndGrad<Exec::kParallel>)->Arg(32)->Arg(3000);

}  // namespace

BENCHMARK_MAIN();
