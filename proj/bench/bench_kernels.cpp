// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference vs OpenMP kernels. The thread-count argument applies to
// the parallel variants only.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "rvqtok/kernels.hpp"
#include "rvqtok/mel.hpp"
#include "support.hpp"

namespace {

using rvqtok::MatrixD;
namespace kernels = rvqtok::kernels;

struct AssignFixture {
  MatrixD book, points;
  std::vector<std::uint32_t> out;

  AssignFixture(std::size_t k, std::size_t n) {
    rvqtok::test::Rng rng(7);
    book = rvqtok::test::random_matrix(rng, k, 640);
    points = rvqtok::test::random_matrix(rng, n, 640);
    out.resize(n);
  }
};

void BM_AssignSerial(benchmark::State& state) {
  AssignFixture f(static_cast<std::size_t>(state.range(0)), 2048);
  for (auto _ : state) {
    kernels::serial::assign(f.book, f.points, {}, {}, {}, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * 2048);
}

void BM_AssignParallel(benchmark::State& state) {
  AssignFixture f(static_cast<std::size_t>(state.range(0)), 2048);
  kernels::set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    kernels::assign(f.book, f.points, {}, {}, {}, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * 2048);
}

void BM_AssignGumbelParallel(benchmark::State& state) {
  AssignFixture f(256, 2048);
  kernels::set_num_threads(static_cast<int>(state.range(0)));
  const rvqtok::AssignOptions opts{true, 0.5, 3};
  for (auto _ : state) {
    kernels::assign(f.book, f.points, {}, {}, opts, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
}

struct MelFixture {
  rvqtok::MelConfig cfg;
  MatrixD bank;
  std::vector<double> padded;
  std::size_t frames;

  MelFixture() : bank(rvqtok::mel_filterbank(cfg)) {
    rvqtok::test::Rng rng(5);
    const auto clip = rvqtok::test::synth_clip(rng, 10.0);
    frames = rvqtok::mel_frame_count(clip.samples.size(), cfg);
    padded.assign(cfg.n_fft / 2, 0.0);
    padded.insert(padded.end(), clip.samples.begin(), clip.samples.end());
    padded.resize(padded.size() + cfg.n_fft / 2, 0.0);
  }
};

void BM_MelSerial(benchmark::State& state) {
  MelFixture f;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::serial::log_mel_frames(f.padded, f.frames, f.cfg, f.bank));
  }
}

void BM_MelParallel(benchmark::State& state) {
  MelFixture f;
  kernels::set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::log_mel_frames(f.padded, f.frames, f.cfg, f.bank));
  }
}

BENCHMARK(BM_AssignSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssignParallel)
    ->ArgsProduct({{256, 1024}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_AssignGumbelParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MelSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MelParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
