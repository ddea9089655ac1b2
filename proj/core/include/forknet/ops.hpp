// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "forknet/spectral.hpp"
#include "forknet/tape.hpp"
#include "forknet/tensor.hpp"

#include <array>
#include <vector>

namespace forknet::ops {

// Elementwise; shapes must match.
Var add(Tape& t, const Var& a, const Var& b);
Var sub(Tape& t, const Var& a, const Var& b);
Var mul(Tape& t, const Var& a, const Var& b);
Var scale(Tape& t, const Var& a, double s);

// Rank-2 linear algebra.
Var matmul(Tape& t, const Var& a, const Var& b);        // {m,k}·{k,n}
Var transpose(Tape& t, const Var& a);                   // {m,n} -> {n,m}
Var add_rowvec(Tape& t, const Var& a, const Var& v);    // a{m,n} + v{n} per row
Var add_colvec(Tape& t, const Var& a, const Var& v);    // a{m,n} + v{m} per col

// Axis-0 splitting/joining; trailing dimensions are preserved verbatim.
Var slice_rows(Tape& t, const Var& a, long r0, long r1);
Var concat_rows(Tape& t, const std::vector<Var>& parts);
// Rank-2 column splitting/joining.
Var slice_cols(Tape& t, const Var& a, long c0, long c1);
Var concat_cols(Tape& t, const std::vector<Var>& parts);

Var reshape(Tape& t, const Var& a, std::vector<long> shape);
// Axes reorder for rank-3: out.shape[k] = a.shape[p[k]] (numpy transpose).
Var permute3(Tape& t, const Var& a, const std::array<int, 3>& p);

Var sum(Tape& t, const Var& a);  // -> {1}

// Activations.
Var sigmoid(Tape& t, const Var& a);
Var tanh_op(Tape& t, const Var& a);
Var relu(Tape& t, const Var& a);
// x{C,N} with one learned slope per row/channel; alpha{C}.
Var prelu(Tape& t, const Var& x, const Var& alpha);

// Normalize each column of x{C,N} over its C entries, then per-row affine.
Var layer_norm_cols(Tape& t, const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

// softmax(Q·K^T/sqrt(Dh))·V over one sequence; all inputs {L,Dh}.
Var attention_core(Tape& t, const Var& q, const Var& k, const Var& v);

// One GRU time step for a batch of B rows. Gate columns are [z|r|n]:
//   z = sig(x·Wx_z + h·Wh_z + b_z), r = sig(x·Wx_r + h·Wh_r + b_r),
//   n = tanh(x·Wx_n + (r.h)·Wh_n + b_n), h' = (1-z).h + z.n.
// x{B,Din}, h{B,Dh}, wx{Din,3Dh}, wh{Dh,3Dh}, b{3Dh}.
Var gru_step(Tape& t, const Var& x, const Var& h, const Var& wx, const Var& wh, const Var& b);

// x{Cin,T,F}, w{Cout,Cin,kT,kF}, b{Cout}. Past-only padding of
// (kT-1)*dil_t frames in time, symmetric (kF-1)/2 bins in frequency (kF odd).
Var conv2d_causal(Tape& t, const Var& x, const Var& w, const Var& b, long dil_t);

// Split x{C,N} into T abutting chunks of `chunk` samples -> {C,T,chunk};
// samples beyond N read as zero, samples beyond T*chunk are dropped.
Var segment_time(Tape& t, const Var& x, long chunk, long frames);

// Linear transform pair between waveforms and {2,T,F} spectrogram tensors.
Var stft_op(Tape& t, const Var& x, const detail::Framing& fr);
Var istft_op(Tape& t, const Var& spec, const detail::Framing& fr, long out_len);

// {2,T,F} complex-pair helpers.
Var complex_abs(Tape& t, const Var& a);                  // -> {1,T,F}
Var complex_mul(Tape& t, const Var& a, const Var& b);    // bin-wise product
Var compress_complex(Tape& t, const Var& a, double c);   // |a|^c with phase kept

}  // namespace forknet::ops
