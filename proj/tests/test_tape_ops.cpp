// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "forknet/gradcheck.hpp"
#include "forknet/ops.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace forknet;
using testutil::random_tensor;

TEST_CASE("every differentiable op passes the finite-difference suite") {
  for (const auto& rep : gradcheck_suite(0)) {
    INFO(rep.name, " max_rel_err=", rep.max_rel_err);
    CHECK(rep.pass);
    CHECK(rep.max_rel_err < 1e-4);
  }
}

TEST_CASE("tape mechanics") {
  Tape t;
  Var a = t.leaf(Tensor::from({2}, {1.0, 2.0}));
  Var b = Tape::constant(Tensor::from({2}, {3.0, 4.0}));
  Var p = ops::mul(t, a, b);
  Var s = ops::sum(t, p);
  t.backward(s);
  const Tensor* g = t.grad(a);
  REQUIRE(g != nullptr);
  CHECK((*g)[0] == 3.0);
  CHECK((*g)[1] == 4.0);
  CHECK(t.grad(b) == nullptr);  // constants never accumulate gradients

  // Non-recording tape keeps nothing and marks results untracked.
  Tape quiet(false);
  Var qa = quiet.leaf(Tensor::from({2}, {1.0, 2.0}));
  Var qs = ops::sum(quiet, ops::mul(quiet, qa, b));
  CHECK(quiet.size() == 0);
  CHECK(!qs.tracked());
  CHECK(qs.t()[0] == 11.0);

  // backward demands a tracked scalar root.
  CHECK_THROWS_AS(quiet.backward(qs), std::invalid_argument);
  Tape t2;
  Var big = t2.leaf(Tensor::from({2}, {1.0, 2.0}));
  CHECK_THROWS_AS(t2.backward(big), std::invalid_argument);
}

TEST_CASE("constant branches are pruned from the graph") {
  Tape t;
  Var a = Tape::constant(Tensor::from({2}, {1.0, 2.0}));
  Var b = Tape::constant(Tensor::from({2}, {3.0, 4.0}));
  long before = t.size();
  Var c = ops::mul(t, a, b);  // all-constant op records nothing
  CHECK(t.size() == before);
  CHECK(!c.tracked());
}

TEST_CASE("permute3 matches manual axis reordering") {
  std::mt19937_64 rng(3);
  Tensor x = random_tensor(rng, {2, 3, 4});
  Tape t(false);
  Var y = ops::permute3(t, Tape::constant(x), {2, 0, 1});
  CHECK(y.t().dim(0) == 4);
  CHECK(y.t().dim(1) == 2);
  CHECK(y.t().dim(2) == 3);
  for (long i = 0; i < 2; ++i)
    for (long j = 0; j < 3; ++j)
      for (long k = 0; k < 4; ++k) CHECK(y.t()[(k * 2 + i) * 3 + j] == x[(i * 3 + j) * 4 + k]);
}

TEST_CASE("slice and concat invert each other") {
  std::mt19937_64 rng(4);
  Tensor x = random_tensor(rng, {5, 3});
  Tape t(false);
  Var v = Tape::constant(x);
  Var top = ops::slice_rows(t, v, 0, 2);
  Var bot = ops::slice_rows(t, v, 2, 5);
  Var back = ops::concat_rows(t, {top, bot});
  for (long i = 0; i < x.numel(); ++i) CHECK(back.t()[i] == x[i]);

  Var left = ops::slice_cols(t, v, 0, 1);
  Var right = ops::slice_cols(t, v, 1, 3);
  Var back2 = ops::concat_cols(t, {left, right});
  for (long i = 0; i < x.numel(); ++i) CHECK(back2.t()[i] == x[i]);
}

TEST_CASE("segment_time pads with zeros and drops the tail") {
  Tensor x = Tensor::from({1, 5}, {1, 2, 3, 4, 5});
  Tape t(false);
  // Two chunks of 3: second chunk is [4, 5, 0].
  Var seg = ops::segment_time(t, Tape::constant(x), 3, 2);
  CHECK(seg.t().shape() == std::vector<long>{1, 2, 3});
  CHECK(seg.t()[3] == 4.0);
  CHECK(seg.t()[5] == 0.0);
  // One chunk of 3 drops samples 4 and 5.
  Var one = ops::segment_time(t, Tape::constant(x), 3, 1);
  CHECK(one.t().shape() == std::vector<long>{1, 1, 3});
  CHECK(one.t()[2] == 3.0);
}

TEST_CASE("gru zero weights give zero states") {
  Tape t(false);
  long b = 2, din = 3, dh = 4;
  Var x = Tape::constant(Tensor::full({b, din}, 0.7));
  Var h = Tape::constant(Tensor({b, dh}));
  Var wx = Tape::constant(Tensor({din, 3 * dh}));
  Var wh = Tape::constant(Tensor({dh, 3 * dh}));
  Var bias = Tape::constant(Tensor({3 * dh}));
  Var h1 = ops::gru_step(t, x, h, wx, wh, bias);
  for (long i = 0; i < h1.t().numel(); ++i) CHECK(h1.t()[i] == 0.0);
}

TEST_CASE("scalar gru hand evaluation") {
  // z and r gate weights zeroed: h1 = z * tanh(wx_n * x) with z = sigmoid(0) = 1/2.
  Tape t(false);
  double wxn = 20.0, xv = 0.7;
  Var x = Tape::constant(Tensor::from({1, 1}, {xv}));
  Var h = Tape::constant(Tensor({1, 1}));
  Tensor wx({1, 3});
  wx[2] = wxn;  // gate order [z | r | n]
  Var wxv = Tape::constant(wx);
  Var wh = Tape::constant(Tensor({1, 3}));
  Var bias = Tape::constant(Tensor({3}));
  Var h1 = ops::gru_step(t, x, h, wxv, wh, bias);
  CHECK(h1.t()[0] == doctest::Approx(0.5 * std::tanh(wxn * xv)).epsilon(1e-12));
}

TEST_CASE("attention degenerate cases") {
  std::mt19937_64 rng(8);
  Tape t(false);
  // Length-1 sequence: softmax over one element, output = value row.
  Tensor q1 = random_tensor(rng, {1, 4}), k1 = random_tensor(rng, {1, 4}), v1 = random_tensor(rng, {1, 4});
  Var out1 = ops::attention_core(t, Tape::constant(q1), Tape::constant(k1), Tape::constant(v1));
  for (long i = 0; i < 4; ++i) CHECK(out1.t()[i] == doctest::Approx(v1[i]).epsilon(1e-12));

  // Uniform keys: every query distributes uniformly, output = mean of values.
  Tensor k = Tensor::full({5, 4}, 0.3);
  Tensor q = random_tensor(rng, {5, 4});
  Tensor v = random_tensor(rng, {5, 4});
  Var out = ops::attention_core(t, Tape::constant(q), Tape::constant(k), Tape::constant(v));
  for (long j = 0; j < 4; ++j) {
    double mean = 0.0;
    for (long i = 0; i < 5; ++i) mean += v[i * 4 + j];
    mean /= 5.0;
    for (long i = 0; i < 5; ++i) CHECK(out.t()[i * 4 + j] == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("attention matches a dense reference") {
  std::mt19937_64 rng(11);
  long l = 6, dh = 4;
  Tensor q = random_tensor(rng, {l, dh}), k = random_tensor(rng, {l, dh}), v = random_tensor(rng, {l, dh});
  Tape t(false);
  Var out = ops::attention_core(t, Tape::constant(q), Tape::constant(k), Tape::constant(v));
  for (long i = 0; i < l; ++i) {
    std::vector<double> logits(static_cast<size_t>(l));
    double mx = -1e300;
    for (long j = 0; j < l; ++j) {
      double dot = 0.0;
      for (long c = 0; c < dh; ++c) dot += q[i * dh + c] * k[j * dh + c];
      logits[static_cast<size_t>(j)] = dot / std::sqrt(static_cast<double>(dh));
      mx = std::max(mx, logits[static_cast<size_t>(j)]);
    }
    double z = 0.0;
    for (double& lg : logits) {
      lg = std::exp(lg - mx);
      z += lg;
    }
    for (long c = 0; c < dh; ++c) {
      double want = 0.0;
      for (long j = 0; j < l; ++j) want += logits[static_cast<size_t>(j)] / z * v[j * dh + c];
      CHECK(out.t()[i * dh + c] == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("layer norm identities") {
  Tape t(false);
  Var gamma = Tape::constant(Tensor::full({2}, 1.0));
  Var beta = Tape::constant(Tensor({2}));

  // Constant column normalizes to zero.
  Var cx = Tape::constant(Tensor::from({2, 1}, {3.0, 3.0}));
  Var cy = ops::layer_norm_cols(t, cx, gamma, beta);
  CHECK(cy.t()[0] == doctest::Approx(0.0));
  CHECK(cy.t()[1] == doctest::Approx(0.0));

  // [1, -1]: variance 1, so the output shrinks by 1/sqrt(1 + eps).
  Var px = Tape::constant(Tensor::from({2, 1}, {1.0, -1.0}));
  Var py = ops::layer_norm_cols(t, px, gamma, beta);
  double want = 1.0 / std::sqrt(1.0 + 1e-5);
  CHECK(py.t()[0] == doctest::Approx(want).epsilon(1e-12));
  CHECK(py.t()[1] == doctest::Approx(-want).epsilon(1e-12));

  // Random columns come out with mean ~0 and variance ~1 pre-affine.
  std::mt19937_64 rng(17);
  Tensor x = random_tensor(rng, {8, 5});
  Var y = ops::layer_norm_cols(t, Tape::constant(x), Tape::constant(Tensor::full({8}, 1.0)),
                               Tape::constant(Tensor({8})));
  for (long col = 0; col < 5; ++col) {
    double mean = 0.0, var = 0.0;
    for (long r = 0; r < 8; ++r) mean += y.t()[r * 5 + col];
    mean /= 8.0;
    for (long r = 0; r < 8; ++r) {
      double d = y.t()[r * 5 + col] - mean;
      var += d * d;
    }
    var /= 8.0;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("causal conv ignores the future") {
  std::mt19937_64 rng(23);
  long cin = 2, t_len = 7, f_len = 5;
  Tensor x = random_tensor(rng, {cin, t_len, f_len});
  Tensor w = random_tensor(rng, {3, cin, 2, 3});
  Tensor b = random_tensor(rng, {3});
  Tape t(false);
  Var y0 = ops::conv2d_causal(t, Tape::constant(x), Tape::constant(w), Tape::constant(b), 1);

  Tensor xz = x;
  long t0 = 4;
  for (long c = 0; c < cin; ++c)
    for (long tt = t0; tt < t_len; ++tt)
      for (long f = 0; f < f_len; ++f) xz[(c * t_len + tt) * f_len + f] = 0.0;
  Var y1 = ops::conv2d_causal(t, Tape::constant(xz), Tape::constant(w), Tape::constant(b), 1);
  for (long c = 0; c < 3; ++c)
    for (long tt = 0; tt < t0; ++tt)
      for (long f = 0; f < f_len; ++f)
        CHECK(y0.t()[(c * t_len + tt) * f_len + f] == y1.t()[(c * t_len + tt) * f_len + f]);
}

TEST_CASE("conv rejects even frequency kernels") {
  Tape t(false);
  Var x = Tape::constant(Tensor({1, 3, 4}));
  Var w = Tape::constant(Tensor({1, 1, 2, 2}));
  Var b = Tape::constant(Tensor({1}));
  CHECK_THROWS_AS(ops::conv2d_causal(t, x, w, b, 1), std::invalid_argument);
}

TEST_CASE("compress_complex keeps phase and powers magnitude") {
  Tape t(false);
  Tensor a({2, 1, 1});
  a[0] = 3.0;
  a[1] = 4.0;
  Var out = ops::compress_complex(t, Tape::constant(a), 0.5);
  double m = std::sqrt(std::hypot(3.0, 4.0));
  CHECK(std::hypot(out.t()[0], out.t()[1]) == doctest::Approx(m).epsilon(1e-12));
  CHECK(std::atan2(out.t()[1], out.t()[0]) == doctest::Approx(std::atan2(4.0, 3.0)).epsilon(1e-12));

  Tensor z({2, 1, 1});
  Var zz = ops::compress_complex(t, Tape::constant(z), 0.5);
  CHECK(zz.t()[0] == 0.0);
  CHECK(zz.t()[1] == 0.0);
}
