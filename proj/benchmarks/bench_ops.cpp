// Copyright 2026 The Incremental Representation Authors. All Rights Reserved.
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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ir/augment.hpp"
#include "ir/engine.hpp"
#include "ir/model.hpp"
#include "ir/ops.hpp"

namespace {

using namespace ir;

ad::Tensor random_tensor(ad::Shape shape, std::uint64_t seed, bool grad = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  std::vector<double> data(n);
  for (double& v : data) v = u(rng);
  return ad::Tensor(std::move(shape), std::move(data), grad);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tensor({n, n}, 1);
  const auto b = random_tensor({n, n}, 2);
  for (auto _ : state) {
    ad::Tape tape(false);
    benchmark::DoNotOptimize(ad::matmul(tape, a, b).data().data());
  }
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128);

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto input = random_tensor({batch, 8, 16, 16}, 3);
  const auto kernels = random_tensor({16, 8, 3, 3}, 4, true);
  for (auto _ : state) {
    ad::Tape tape;
    const auto y = ad::conv2d(tape, input, kernels);
    tape.backward(ad::sum(tape, y));
    benchmark::DoNotOptimize(kernels.grad().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(1)->Arg(64);

void BM_NuclearPenalty(benchmark::State& state) {
  const auto a = random_tensor({64, 32}, 5, true);
  const auto b = random_tensor({64, 32}, 6);
  for (auto _ : state) {
    ad::Tape tape;
    tape.backward(ad::nuclear_penalty(tape, a, b));
  }
}
BENCHMARK(BM_NuclearPenalty);

// One epoch of rotation-augmented training on 64 samples per class, 4 classes.
void BM_TrainEpoch(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset ds;
  for (ClassId c = 0; c < 4; ++c)
    for (int i = 0; i < 64; ++i) {
      Image img{1, 16, 16, std::vector<double>(256)};
      for (double& p : img.pixels) p = u(rng);
      ds.samples.push_back({img, c});
    }
  ds.refresh_classes();
  const auto data = aug::augment_rotation(ds);
  cil::PhaseConfig cfg;
  cfg.epochs = 1;
  cfg.enable_sm = false;
  const nn::Model model(nn::ExtractorSpec::desk_default(1, 16), data.label_map.augmented_count(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(cil::train_phase(model, nullptr, data, cfg, 0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.samples.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
