// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/loss.hpp"
#include "forknet/model.hpp"
#include "forknet/ops.hpp"
#include "forknet/training.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace forknet;

AudioBuffer one_second(uint64_t seed) { return synth_clean(seed, 1.0, 16000); }

void BM_stft_1s(benchmark::State& state) {
  AudioBuffer x = one_second(1);
  StftConfig cfg = StftConfig::paper();
  for (auto _ : state) {
    ComplexSpectrogram s = stft(x, cfg);
    benchmark::DoNotOptimize(s.real.data());
  }
}
BENCHMARK(BM_stft_1s);

void BM_istft_1s(benchmark::State& state) {
  AudioBuffer x = one_second(1);
  ComplexSpectrogram s = stft(x, StftConfig::paper());
  for (auto _ : state) {
    AudioBuffer y = istft(s, x.size());
    benchmark::DoNotOptimize(y.samples.data());
  }
}
BENCHMARK(BM_istft_1s);

// Real-time factor probes: items_per_second > 16000 means faster than input.
void BM_enhance_tiny_1s(benchmark::State& state) {
  ForkNet model(ForkNetConfig::tiny_train(), 7);
  AudioBuffer x = one_second(2);
  for (auto _ : state) {
    AudioBuffer y = model.enhance(x);
    benchmark::DoNotOptimize(y.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_enhance_tiny_1s)->Unit(benchmark::kMillisecond);

void BM_enhance_paper_quarter_s(benchmark::State& state) {
  ForkNet model(ForkNetConfig::paper(), 7);
  AudioBuffer x = synth_clean(2, 0.25, 16000);
  for (auto _ : state) {
    AudioBuffer y = model.enhance(x);
    benchmark::DoNotOptimize(y.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_enhance_paper_quarter_s)->Unit(benchmark::kMillisecond);

void BM_gru_step(benchmark::State& state) {
  long b = state.range(0), din = 32, dh = 32;
  Tape t(false);
  ParamInit init(3);
  Var x = Tape::constant(init.weight({b, din}, din));
  Var h = Tape::constant(init.weight({b, dh}, dh));
  Var wx = Tape::constant(init.weight({din, 3 * dh}, din));
  Var wh = Tape::constant(init.weight({dh, 3 * dh}, dh));
  Var bias = Tape::constant(Tensor({3 * dh}));
  for (auto _ : state) {
    Var y = ops::gru_step(t, x, h, wx, wh, bias);
    benchmark::DoNotOptimize(y.t().data());
  }
}
BENCHMARK(BM_gru_step)->Arg(64)->Arg(256);

void BM_attention_core(benchmark::State& state) {
  long l = state.range(0), dh = 8;
  Tape t(false);
  ParamInit init(4);
  Var q = Tape::constant(init.weight({l, dh}, dh));
  Var k = Tape::constant(init.weight({l, dh}, dh));
  Var v = Tape::constant(init.weight({l, dh}, dh));
  for (auto _ : state) {
    Var y = ops::attention_core(t, q, k, v);
    benchmark::DoNotOptimize(y.t().data());
  }
}
BENCHMARK(BM_attention_core)->Arg(64)->Arg(256);

void BM_conv2d_causal(benchmark::State& state) {
  Tape t(false);
  ParamInit init(5);
  Var x = Tape::constant(init.weight({16, 64, 32}, 16));
  Var w = Tape::constant(init.weight({16, 16, 2, 3}, 96));
  Var b = Tape::constant(Tensor({16}));
  for (auto _ : state) {
    Var y = ops::conv2d_causal(t, x, w, b, 1);
    benchmark::DoNotOptimize(y.t().data());
  }
}
BENCHMARK(BM_conv2d_causal);

void BM_total_loss_1s(benchmark::State& state) {
  AudioBuffer s = one_second(5);
  AudioBuffer y = one_second(6);
  StftConfig cfg = StftConfig::paper();
  ComplexSpectrogram ss = stft(s, cfg);
  ComplexSpectrogram ys = stft(y, cfg);
  LossConfig lc;
  for (auto _ : state) {
    double l = total_loss(ys, ss, y, s, lc);
    benchmark::DoNotOptimize(l);
  }
}
BENCHMARK(BM_total_loss_1s);

void BM_train_step_tiny(benchmark::State& state) {
  ForkNet model(ForkNetConfig::tiny_train(), 11);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 1;
  tc.chunk_s = 0.25;
  DatasetSpec ds;
  ds.fixed_single = true;
  ds.utts_per_epoch = 1;
  LossConfig lc;
  for (auto _ : state) {
    TrainResult r = train(model, tc, ds, lc, "", nullptr);
    benchmark::DoNotOptimize(r.step_loss.data());
  }
}
BENCHMARK(BM_train_step_tiny)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
