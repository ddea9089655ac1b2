// Copyright 2026 the forknet authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "forknet/ops.hpp"

#include <algorithm>
#include <cmath>

namespace forknet::ops {

namespace {

bool any_tracked(std::initializer_list<const Var*> vs) {
  for (const Var* v : vs) {
    if (v->tracked()) return true;
  }
  return false;
}

Tensor permute3_tensor(const Tensor& a, const std::array<int, 3>& p) {
  const long d0 = a.dim(0), d1 = a.dim(1), d2 = a.dim(2);
  const long dims[3] = {d0, d1, d2};
  Tensor out({dims[p[0]], dims[p[1]], dims[p[2]]});
  const long o1 = out.dim(1), o2 = out.dim(2);
  long idx[3];
  for (long i0 = 0; i0 < out.dim(0); ++i0) {
    for (long i1 = 0; i1 < o1; ++i1) {
      for (long i2 = 0; i2 < o2; ++i2) {
        idx[p[0]] = i0;
        idx[p[1]] = i1;
        idx[p[2]] = i2;
        out[(i0 * o1 + i1) * o2 + i2] = a[(idx[0] * d1 + idx[1]) * d2 + idx[2]];
      }
    }
  }
  return out;
}

// Copy of x{C,T,F} (collapsed as {C,T*F}) shifted by (dt, df); out-of-range
// positions read zero. Used by conv2d_causal per kernel tap.
void shifted_copy(const Tensor& x, long T, long F, long dt, long df, Mat& dst) {
  const long C = x.dim(0);
  dst.setZero(C, T * F);
  ConstMatMap xm(x.data(), C, T * F);
  for (long t = dt > 0 ? dt : 0; t < T; ++t) {
    long src_t = t - dt;
    long f_lo = df > 0 ? df : 0;
    long f_hi = F + (df < 0 ? df : 0);
    if (f_lo >= f_hi) continue;
    dst.block(0, t * F + f_lo, C, f_hi - f_lo) = xm.block(0, src_t * F + f_lo - df, C, f_hi - f_lo);
  }
}

}  // namespace

Var add(Tape& t, const Var& a, const Var& b) {
  require(a.t().same_shape(b.t()), "add: shapes differ");
  Tensor out = a.t();
  out.mat() += b.t().mat();
  if (!any_tracked({&a, &b})) return Tape::constant(std::move(out));
  int ai = a.node, bi = b.node;
  return t.record(std::move(out), [ai, bi](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) ga->mat() += g.mat();
    if (Tensor* gb = tp.grad_slot(bi)) gb->mat() += g.mat();
  });
}

Var sub(Tape& t, const Var& a, const Var& b) {
  require(a.t().same_shape(b.t()), "sub: shapes differ");
  Tensor out = a.t();
  out.mat() -= b.t().mat();
  if (!any_tracked({&a, &b})) return Tape::constant(std::move(out));
  int ai = a.node, bi = b.node;
  return t.record(std::move(out), [ai, bi](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) ga->mat() += g.mat();
    if (Tensor* gb = tp.grad_slot(bi)) gb->mat() -= g.mat();
  });
}

Var mul(Tape& t, const Var& a, const Var& b) {
  require(a.t().same_shape(b.t()), "mul: shapes differ");
  Tensor out = a.t();
  out.mat().array() *= b.t().mat().array();
  if (!any_tracked({&a, &b})) return Tape::constant(std::move(out));
  int ai = a.node, bi = b.node;
  auto av = a.value, bv = b.value;
  return t.record(std::move(out), [ai, bi, av, bv](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) ga->mat().array() += g.mat().array() * bv->mat().array();
    if (Tensor* gb = tp.grad_slot(bi)) gb->mat().array() += g.mat().array() * av->mat().array();
  });
}

Var scale(Tape& t, const Var& a, double s) {
  Tensor out = a.t();
  out.mat() *= s;
  if (!a.tracked()) return Tape::constant(std::move(out));
  int ai = a.node;
  return t.record(std::move(out), [ai, s](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) ga->mat() += s * g.mat();
  });
}

Var matmul(Tape& t, const Var& a, const Var& b) {
  require(a.t().rank() == 2 && b.t().rank() == 2, "matmul: rank-2 operands required");
  require(a.t().dim(1) == b.t().dim(0), "matmul: inner dimensions differ");
  Tensor out({a.t().dim(0), b.t().dim(1)});
  out.mat().noalias() = a.t().mat() * b.t().mat();
  if (!any_tracked({&a, &b})) return Tape::constant(std::move(out));
  int ai = a.node, bi = b.node;
  auto av = a.value, bv = b.value;
  return t.record(std::move(out), [ai, bi, av, bv](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) ga->mat().noalias() += g.mat() * bv->mat().transpose();
    if (Tensor* gb = tp.grad_slot(bi)) gb->mat().noalias() += av->mat().transpose() * g.mat();
  });
}

Var transpose(Tape& t, const Var& a) {
  require(a.t().rank() == 2, "transpose: rank-2 operand required");
  Tensor out({a.t().dim(1), a.t().dim(0)});
  out.mat() = a.t().mat().transpose();
  if (!a.tracked()) return Tape::constant(std::move(out));
  int ai = a.node;
  return t.record(std::move(out), [ai](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) ga->mat() += g.mat().transpose();
  });
}

Var add_rowvec(Tape& t, const Var& a, const Var& v) {
  require(a.t().rank() == 2 && v.t().numel() == a.t().dim(1), "add_rowvec: length must match columns");
  Tensor out = a.t();
  ConstMatMap vm(v.t().data(), 1, v.t().numel());
  out.mat().rowwise() += vm.row(0);
  if (!any_tracked({&a, &v})) return Tape::constant(std::move(out));
  int ai = a.node, vi = v.node;
  return t.record(std::move(out), [ai, vi](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) ga->mat() += g.mat();
    if (Tensor* gv = tp.grad_slot(vi)) {
      MatMap gvm(gv->data(), 1, gv->numel());
      gvm.row(0) += g.mat().colwise().sum();
    }
  });
}

Var add_colvec(Tape& t, const Var& a, const Var& v) {
  require(a.t().rank() >= 2 && v.t().numel() == a.t().dim(0), "add_colvec: length must match rows");
  Tensor out = a.t();
  ConstMatMap vm(v.t().data(), v.t().numel(), 1);
  out.mat().colwise() += vm.col(0);
  if (!any_tracked({&a, &v})) return Tape::constant(std::move(out));
  int ai = a.node, vi = v.node;
  return t.record(std::move(out), [ai, vi](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) ga->mat() += g.mat();
    if (Tensor* gv = tp.grad_slot(vi)) {
      MatMap gvm(gv->data(), gv->numel(), 1);
      gvm.col(0) += g.mat().rowwise().sum();
    }
  });
}

Var slice_rows(Tape& t, const Var& a, long r0, long r1) {
  require(a.t().rank() >= 1, "slice_rows: rank >= 1 required");
  require(0 <= r0 && r0 < r1 && r1 <= a.t().dim(0), "slice_rows: bad row range");
  std::vector<long> shape = a.t().shape();
  shape[0] = r1 - r0;
  Tensor out(shape);
  const long stride = a.t().cols();
  std::copy(a.t().data() + r0 * stride, a.t().data() + r1 * stride, out.data());
  if (!a.tracked()) return Tape::constant(std::move(out));
  int ai = a.node;
  return t.record(std::move(out), [ai, r0, stride](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) {
      double* dst = ga->data() + r0 * stride;
      for (long i = 0; i < g.numel(); ++i) dst[i] += g[i];
    }
  });
}

Var concat_rows(Tape& t, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: no operands");
  std::vector<long> shape = parts[0].t().shape();
  require(!shape.empty(), "concat_rows: rank >= 1 required");
  long rows = 0;
  for (const Var& p : parts) {
    std::vector<long> s = p.t().shape();
    require(s.size() == shape.size(), "concat_rows: ranks differ");
    for (size_t i = 1; i < s.size(); ++i) require(s[i] == shape[i], "concat_rows: trailing dims differ");
    rows += s[0];
  }
  shape[0] = rows;
  Tensor out(shape);
  double* dst = out.data();
  bool tracked = false;
  std::vector<std::pair<int, long>> layout;  // (node, element count)
  for (const Var& p : parts) {
    std::copy(p.t().data(), p.t().data() + p.t().numel(), dst);
    dst += p.t().numel();
    layout.emplace_back(p.node, p.t().numel());
    tracked = tracked || p.tracked();
  }
  if (!tracked) return Tape::constant(std::move(out));
  return t.record(std::move(out), [layout](Tape& tp, const Tensor& g) {
    long off = 0;
    for (auto [node, count] : layout) {
      if (Tensor* gp = tp.grad_slot(node)) {
        for (long i = 0; i < count; ++i) (*gp)[i] += g[off + i];
      }
      off += count;
    }
  });
}

Var slice_cols(Tape& t, const Var& a, long c0, long c1) {
  require(a.t().rank() == 2, "slice_cols: rank-2 operand required");
  require(0 <= c0 && c0 < c1 && c1 <= a.t().dim(1), "slice_cols: bad column range");
  Tensor out({a.t().dim(0), c1 - c0});
  out.mat() = a.t().mat().middleCols(c0, c1 - c0);
  if (!a.tracked()) return Tape::constant(std::move(out));
  int ai = a.node;
  return t.record(std::move(out), [ai, c0, c1](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) ga->mat().middleCols(c0, c1 - c0) += g.mat();
  });
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no operands");
  const long rows = parts[0].t().dim(0);
  long cols = 0;
  for (const Var& p : parts) {
    require(p.t().rank() == 2 && p.t().dim(0) == rows, "concat_cols: row counts differ");
    cols += p.t().dim(1);
  }
  Tensor out({rows, cols});
  long off = 0;
  bool tracked = false;
  std::vector<std::pair<int, long>> layout;  // (node, column count)
  for (const Var& p : parts) {
    out.mat().middleCols(off, p.t().dim(1)) = p.t().mat();
    layout.emplace_back(p.node, p.t().dim(1));
    off += p.t().dim(1);
    tracked = tracked || p.tracked();
  }
  if (!tracked) return Tape::constant(std::move(out));
  return t.record(std::move(out), [layout](Tape& tp, const Tensor& g) {
    long c = 0;
    for (auto [node, width] : layout) {
      if (Tensor* gp = tp.grad_slot(node)) gp->mat() += g.mat().middleCols(c, width);
      c += width;
    }
  });
}

Var reshape(Tape& t, const Var& a, std::vector<long> shape) {
  Tensor out = a.t().reshaped(std::move(shape));
  if (!a.tracked()) return Tape::constant(std::move(out));
  int ai = a.node;
  return t.record(std::move(out), [ai](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) {
      for (long i = 0; i < g.numel(); ++i) (*ga)[i] += g[i];
    }
  });
}

Var permute3(Tape& t, const Var& a, const std::array<int, 3>& p) {
  require(a.t().rank() == 3, "permute3: rank-3 operand required");
  require(p[0] + p[1] + p[2] == 3 && p[0] != p[1] && p[1] != p[2] && p[0] != p[2],
          "permute3: p must be a permutation of {0,1,2}");
  Tensor out = permute3_tensor(a.t(), p);
  if (!a.tracked()) return Tape::constant(std::move(out));
  std::array<int, 3> pinv;
  for (int k = 0; k < 3; ++k) pinv[p[k]] = k;
  int ai = a.node;
  return t.record(std::move(out), [ai, pinv](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) {
      Tensor gp = permute3_tensor(g, pinv);
      ga->mat() += gp.mat();
    }
  });
}

Var sum(Tape& t, const Var& a) {
  Tensor out = Tensor::scalar(a.t().mat().sum());
  if (!a.tracked()) return Tape::constant(std::move(out));
  int ai = a.node;
  return t.record(std::move(out), [ai](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) ga->mat().array() += g[0];
  });
}

Var sigmoid(Tape& t, const Var& a) {
  Tensor out = a.t();
  for (long i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  auto holder = std::make_shared<const Tensor>(std::move(out));
  if (!a.tracked()) return Tape::constant(holder);
  int ai = a.node;
  return t.adopt(holder, [ai, holder](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) {
      const Tensor& y = *holder;
      for (long i = 0; i < g.numel(); ++i) (*ga)[i] += g[i] * y[i] * (1.0 - y[i]);
    }
  });
}

Var tanh_op(Tape& t, const Var& a) {
  Tensor out = a.t();
  for (long i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
  auto holder = std::make_shared<const Tensor>(std::move(out));
  if (!a.tracked()) return Tape::constant(holder);
  int ai = a.node;
  return t.adopt(holder, [ai, holder](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) {
      const Tensor& y = *holder;
      for (long i = 0; i < g.numel(); ++i) (*ga)[i] += g[i] * (1.0 - y[i] * y[i]);
    }
  });
}

Var relu(Tape& t, const Var& a) {
  Tensor out = a.t();
  for (long i = 0; i < out.numel(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  if (!a.tracked()) return Tape::constant(std::move(out));
  int ai = a.node;
  auto av = a.value;
  return t.record(std::move(out), [ai, av](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) {
      for (long i = 0; i < g.numel(); ++i) {
        if ((*av)[i] > 0.0) (*ga)[i] += g[i];
      }
    }
  });
}

Var prelu(Tape& t, const Var& x, const Var& alpha) {
  require(x.t().rank() >= 2, "prelu: rank >= 2 required");
  require(alpha.t().numel() == x.t().dim(0), "prelu: one slope per channel row required");
  const long C = x.t().dim(0), N = x.t().cols();
  Tensor out = x.t();
  for (long c = 0; c < C; ++c) {
    const double a = alpha.t()[c];
    double* row = out.data() + c * N;
    for (long j = 0; j < N; ++j) {
      if (row[j] <= 0.0) row[j] *= a;
    }
  }
  if (!any_tracked({&x, &alpha})) return Tape::constant(std::move(out));
  int xi = x.node, ai = alpha.node;
  auto xv = x.value, av = alpha.value;
  return t.record(std::move(out), [xi, ai, xv, av, C, N](Tape& tp, const Tensor& g) {
    Tensor* gx = tp.grad_slot(xi);
    Tensor* ga = tp.grad_slot(ai);
    for (long c = 0; c < C; ++c) {
      const double a = (*av)[c];
      const double* xr = xv->data() + c * N;
      const double* gr = g.data() + c * N;
      double da = 0.0;
      for (long j = 0; j < N; ++j) {
        if (xr[j] > 0.0) {
          if (gx) (*gx)[c * N + j] += gr[j];
        } else {
          if (gx) (*gx)[c * N + j] += gr[j] * a;
          da += gr[j] * xr[j];
        }
      }
      if (ga) (*ga)[c] += da;
    }
  });
}

Var layer_norm_cols(Tape& t, const Var& x, const Var& gamma, const Var& beta, double eps) {
  require(x.t().rank() >= 2, "layer_norm_cols: rank >= 2 required");
  const long C = x.t().dim(0), N = x.t().cols();
  require(gamma.t().numel() == C && beta.t().numel() == C, "layer_norm_cols: affine size must match rows");
  Tensor xhat({C, N});
  Tensor inv_std({N});
  {
    ConstMatMap xm(x.t().data(), C, N);
    MatMap hm(xhat.data(), C, N);
    for (long j = 0; j < N; ++j) {
      double mu = xm.col(j).mean();
      double var = (xm.col(j).array() - mu).square().mean();
      double s = 1.0 / std::sqrt(var + eps);
      inv_std[j] = s;
      hm.col(j) = (xm.col(j).array() - mu) * s;
    }
  }
  Tensor out = xhat;
  for (long c = 0; c < C; ++c) {
    double* row = out.data() + c * N;
    const double gm = gamma.t()[c], bt = beta.t()[c];
    for (long j = 0; j < N; ++j) row[j] = row[j] * gm + bt;
  }
  if (x.t().rank() > 2) out = out.reshaped(x.t().shape());
  if (!any_tracked({&x, &gamma, &beta})) return Tape::constant(std::move(out));
  int xi = x.node, gi = gamma.node, bi = beta.node;
  auto hv = std::make_shared<const Tensor>(std::move(xhat));
  auto sv = std::make_shared<const Tensor>(std::move(inv_std));
  auto gv = gamma.value;
  return t.record(std::move(out), [xi, gi, bi, hv, sv, gv, C, N](Tape& tp, const Tensor& g) {
    ConstMatMap gm(g.data(), C, N);
    ConstMatMap hm(hv->data(), C, N);
    if (Tensor* gg = tp.grad_slot(gi)) {
      for (long c = 0; c < C; ++c) (*gg)[c] += (gm.row(c).array() * hm.row(c).array()).sum();
    }
    if (Tensor* gb = tp.grad_slot(bi)) {
      for (long c = 0; c < C; ++c) (*gb)[c] += gm.row(c).sum();
    }
    if (Tensor* gx = tp.grad_slot(xi)) {
      MatMap gxm(gx->data(), C, N);
      Mat ghat(C, N);
      for (long c = 0; c < C; ++c) ghat.row(c) = gm.row(c) * (*gv)[c];
      for (long j = 0; j < N; ++j) {
        double a = ghat.col(j).mean();
        double b = (ghat.col(j).array() * hm.col(j).array()).mean();
        double s = (*sv)[j];
        gxm.col(j).array() += s * (ghat.col(j).array() - a - hm.col(j).array() * b);
      }
    }
  });
}

Var attention_core(Tape& t, const Var& q, const Var& k, const Var& v) {
  require(q.t().rank() == 2 && k.t().rank() == 2 && v.t().rank() == 2, "attention_core: rank-2 operands required");
  require(q.t().same_shape(k.t()) && q.t().same_shape(v.t()), "attention_core: q, k, v shapes must match");
  const long L = q.t().dim(0), Dh = q.t().dim(1);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(Dh));
  Tensor w({L, L});
  {
    MatMap wm = w.mat();
    wm.noalias() = q.t().mat() * k.t().mat().transpose();
    wm *= inv_sqrt;
    for (long i = 0; i < L; ++i) {
      double mx = wm.row(i).maxCoeff();
      wm.row(i) = (wm.row(i).array() - mx).exp();
      wm.row(i) /= wm.row(i).sum();
    }
  }
  Tensor out({L, Dh});
  out.mat().noalias() = w.mat() * v.t().mat();
  if (!any_tracked({&q, &k, &v})) return Tape::constant(std::move(out));
  int qi = q.node, ki = k.node, vi = v.node;
  auto qv = q.value, kv = k.value, vv = v.value;
  auto wv = std::make_shared<const Tensor>(std::move(w));
  return t.record(std::move(out), [qi, ki, vi, qv, kv, vv, wv, L, inv_sqrt](Tape& tp, const Tensor& g) {
    ConstMatMap wm(wv->data(), L, L);
    if (Tensor* gvs = tp.grad_slot(vi)) gvs->mat().noalias() += wm.transpose() * g.mat();
    if (qi < 0 && ki < 0) return;
    Mat dw = g.mat() * vv->mat().transpose();
    Mat ds(L, L);
    for (long i = 0; i < L; ++i) {
      double dot = (dw.row(i).array() * wm.row(i).array()).sum();
      ds.row(i) = wm.row(i).array() * (dw.row(i).array() - dot);
    }
    if (Tensor* gq = tp.grad_slot(qi)) gq->mat().noalias() += inv_sqrt * (ds * kv->mat());
    if (Tensor* gk = tp.grad_slot(ki)) gk->mat().noalias() += inv_sqrt * (ds.transpose() * qv->mat());
  });
}

Var gru_step(Tape& t, const Var& x, const Var& h, const Var& wx, const Var& wh, const Var& b) {
  require(x.t().rank() == 2 && h.t().rank() == 2, "gru_step: rank-2 state required");
  const long B = x.t().dim(0), Din = x.t().dim(1), Dh = h.t().dim(1);
  require(h.t().dim(0) == B, "gru_step: batch sizes differ");
  require(wx.t().rank() == 2 && wx.t().dim(0) == Din && wx.t().dim(1) == 3 * Dh, "gru_step: wx must be {Din,3Dh}");
  require(wh.t().rank() == 2 && wh.t().dim(0) == Dh && wh.t().dim(1) == 3 * Dh, "gru_step: wh must be {Dh,3Dh}");
  require(b.t().numel() == 3 * Dh, "gru_step: bias must be {3Dh}");

  ConstMatMap xm = x.t().mat();
  ConstMatMap hm = h.t().mat();
  ConstMatMap wxm = wx.t().mat();
  ConstMatMap whm = wh.t().mat();
  ConstMatMap bm(b.t().data(), 1, 3 * Dh);

  Mat a(B, 3 * Dh);
  a.noalias() = xm * wxm;
  a.rowwise() += bm.row(0);
  a.leftCols(2 * Dh).noalias() += hm * whm.leftCols(2 * Dh);

  Tensor z({B, Dh}), r({B, Dh}), n({B, Dh}), rh({B, Dh});
  z.mat() = (-a.leftCols(Dh).array()).exp();
  z.mat() = (1.0 + z.mat().array()).inverse();
  r.mat() = (-a.middleCols(Dh, Dh).array()).exp();
  r.mat() = (1.0 + r.mat().array()).inverse();
  rh.mat() = r.mat().array() * hm.array();
  a.rightCols(Dh).noalias() += rh.mat() * whm.rightCols(Dh);
  n.mat() = a.rightCols(Dh).array().tanh();

  Tensor out({B, Dh});
  out.mat() = (1.0 - z.mat().array()) * hm.array() + z.mat().array() * n.mat().array();
  if (!any_tracked({&x, &h, &wx, &wh, &b})) return Tape::constant(std::move(out));

  int xi = x.node, hi = h.node, wxi = wx.node, whi = wh.node, bi = b.node;
  auto xv = x.value, hv = h.value, wxv = wx.value, whv = wh.value;
  auto zv = std::make_shared<const Tensor>(std::move(z));
  auto rv = std::make_shared<const Tensor>(std::move(r));
  auto nv = std::make_shared<const Tensor>(std::move(n));
  auto rhv = std::make_shared<const Tensor>(std::move(rh));
  return t.record(std::move(out), [=](Tape& tp, const Tensor& g) {
    const long Bn = g.dim(0), D = g.dim(1);
    ConstMatMap gm = g.mat();
    ConstMatMap zm = zv->mat(), rm = rv->mat(), nm = nv->mat(), rhm = rhv->mat();
    ConstMatMap hmm = hv->mat(), xmm = xv->mat();
    ConstMatMap wxm2 = wxv->mat(), whm2 = whv->mat();

    Mat dn = gm.array() * zm.array();
    Mat dz = gm.array() * (nm.array() - hmm.array());
    Mat dh_acc = gm.array() * (1.0 - zm.array());

    Mat da(Bn, 3 * D);
    da.rightCols(D) = dn.array() * (1.0 - nm.array().square());
    Mat drh = da.rightCols(D) * whm2.rightCols(D).transpose();
    Mat dr = drh.array() * hmm.array();
    dh_acc.array() += drh.array() * rm.array();
    da.leftCols(D) = dz.array() * zm.array() * (1.0 - zm.array());
    da.middleCols(D, D) = dr.array() * rm.array() * (1.0 - rm.array());
    dh_acc.noalias() += da.leftCols(2 * D) * whm2.leftCols(2 * D).transpose();

    if (Tensor* gx = tp.grad_slot(xi)) gx->mat().noalias() += da * wxm2.transpose();
    if (Tensor* gh = tp.grad_slot(hi)) gh->mat() += dh_acc;
    if (Tensor* gwx = tp.grad_slot(wxi)) gwx->mat().noalias() += xmm.transpose() * da;
    if (Tensor* gwh = tp.grad_slot(whi)) {
      gwh->mat().leftCols(2 * D).noalias() += hmm.transpose() * da.leftCols(2 * D);
      gwh->mat().rightCols(D).noalias() += rhm.transpose() * da.rightCols(D);
    }
    if (Tensor* gb = tp.grad_slot(bi)) {
      MatMap gbm(gb->data(), 1, 3 * D);
      gbm.row(0) += da.colwise().sum();
    }
  });
}

Var conv2d_causal(Tape& t, const Var& x, const Var& w, const Var& b, long dil_t) {
  require(x.t().rank() == 3, "conv2d_causal: input must be {Cin,T,F}");
  require(w.t().rank() == 4, "conv2d_causal: kernel must be {Cout,Cin,kT,kF}");
  const long Cin = x.t().dim(0), T = x.t().dim(1), F = x.t().dim(2);
  const long Cout = w.t().dim(0), kT = w.t().dim(2), kF = w.t().dim(3);
  require(w.t().dim(1) == Cin, "conv2d_causal: kernel input channels differ from input");
  require(kF % 2 == 1, "conv2d_causal: frequency kernel width must be odd");
  require(b.t().numel() == Cout, "conv2d_causal: bias size must be Cout");
  require(dil_t >= 1, "conv2d_causal: dilation must be >= 1");

  Tensor out({Cout, T, F});
  MatMap om(out.data(), Cout, T * F);
  ConstMatMap bm(b.t().data(), Cout, 1);
  om.colwise() = bm.col(0);

  Mat xs;
  Mat wtap(Cout, Cin);
  for (long i = 0; i < kT; ++i) {
    const long dt = (kT - 1 - i) * dil_t;
    for (long j = 0; j < kF; ++j) {
      const long df = j - (kF - 1) / 2;
      for (long o = 0; o < Cout; ++o) {
        for (long c = 0; c < Cin; ++c) wtap(o, c) = w.t()[((o * Cin + c) * kT + i) * kF + j];
      }
      shifted_copy(x.t(), T, F, dt, df, xs);
      om.noalias() += wtap * xs;
    }
  }
  if (!any_tracked({&x, &w, &b})) return Tape::constant(std::move(out));
  int xi = x.node, wi = w.node, bi = b.node;
  auto xv = x.value, wv = w.value;
  return t.record(std::move(out), [=](Tape& tp, const Tensor& g) {
    ConstMatMap gm(g.data(), Cout, T * F);
    if (Tensor* gb = tp.grad_slot(bi)) {
      MatMap gbm(gb->data(), Cout, 1);
      gbm.col(0) += gm.rowwise().sum();
    }
    Tensor* gw = tp.grad_slot(wi);
    Tensor* gx = tp.grad_slot(xi);
    if (!gw && !gx) return;
    Mat xs2, wtap2(Cout, Cin), dtap, dxs;
    for (long i = 0; i < kT; ++i) {
      const long dt = (kT - 1 - i) * dil_t;
      for (long j = 0; j < kF; ++j) {
        const long df = j - (kF - 1) / 2;
        if (gw) {
          shifted_copy(*xv, T, F, dt, df, xs2);
          dtap.noalias() = gm * xs2.transpose();
          for (long o = 0; o < Cout; ++o) {
            for (long c = 0; c < Cin; ++c) (*gw)[((o * Cin + c) * kT + i) * kF + j] += dtap(o, c);
          }
        }
        if (gx) {
          for (long o = 0; o < Cout; ++o) {
            for (long c = 0; c < Cin; ++c) wtap2(o, c) = (*wv)[((o * Cin + c) * kT + i) * kF + j];
          }
          dxs.noalias() = wtap2.transpose() * gm;
          // Scatter back through the shift: output position (t,f) read
          // input position (t-dt, f-df).
          MatMap gxm(gx->data(), Cin, T * F);
          for (long tt = dt > 0 ? dt : 0; tt < T; ++tt) {
            long f_lo = df > 0 ? df : 0;
            long f_hi = F + (df < 0 ? df : 0);
            if (f_lo >= f_hi) continue;
            gxm.block(0, (tt - dt) * F + f_lo - df, Cin, f_hi - f_lo) +=
                dxs.block(0, tt * F + f_lo, Cin, f_hi - f_lo);
          }
        }
      }
    }
  });
}

Var segment_time(Tape& t, const Var& x, long chunk, long frames) {
  require(x.t().rank() == 2, "segment_time: input must be {C,N}");
  require(chunk >= 1 && frames >= 1, "segment_time: chunk and frame count must be positive");
  const long C = x.t().dim(0), N = x.t().dim(1);
  require(N >= chunk, "segment_time: input shorter than one chunk");
  Tensor out({C, frames, chunk});
  for (long c = 0; c < C; ++c) {
    for (long f = 0; f < frames; ++f) {
      for (long j = 0; j < chunk; ++j) {
        long src = f * chunk + j;
        out[(c * frames + f) * chunk + j] = src < N ? x.t()[c * N + src] : 0.0;
      }
    }
  }
  if (!x.tracked()) return Tape::constant(std::move(out));
  int xi = x.node;
  return t.record(std::move(out), [xi, C, N, chunk, frames](Tape& tp, const Tensor& g) {
    if (Tensor* gx = tp.grad_slot(xi)) {
      for (long c = 0; c < C; ++c) {
        for (long f = 0; f < frames; ++f) {
          for (long j = 0; j < chunk; ++j) {
            long dst = f * chunk + j;
            if (dst < N) (*gx)[c * N + dst] += g[(c * frames + f) * chunk + j];
          }
        }
      }
    }
  });
}

Var stft_op(Tape& t, const Var& x, const detail::Framing& fr) {
  require(x.t().rank() == 1, "stft_op: input must be a rank-1 waveform");
  const long n = x.t().numel();
  Tensor out = detail::stft_tensor(x.t().data(), n, fr);
  if (!x.tracked()) return Tape::constant(std::move(out));
  int xi = x.node;
  return t.record(std::move(out), [xi, n, fr](Tape& tp, const Tensor& g) {
    if (Tensor* gx = tp.grad_slot(xi)) {
      Tensor dx = detail::stft_adjoint(g, n, fr);
      for (long i = 0; i < n; ++i) (*gx)[i] += dx[i];
    }
  });
}

Var istft_op(Tape& t, const Var& spec, const detail::Framing& fr, long out_len) {
  require(spec.t().rank() == 3 && spec.t().dim(0) == 2, "istft_op: input must be {2,T,F}");
  const long T = spec.t().dim(1);
  Tensor out = detail::istft_tensor(spec.t(), fr, out_len);
  if (!spec.tracked()) return Tape::constant(std::move(out));
  int si = spec.node;
  return t.record(std::move(out), [si, T, fr, out_len](Tape& tp, const Tensor& g) {
    if (Tensor* gs = tp.grad_slot(si)) {
      Tensor ds = detail::istft_adjoint(g, T, fr, out_len);
      gs->mat() += ds.mat();
    }
  });
}

Var complex_abs(Tape& t, const Var& a) {
  require(a.t().rank() == 3 && a.t().dim(0) == 2, "complex_abs: input must be {2,T,F}");
  const long TF = a.t().dim(1) * a.t().dim(2);
  Tensor out({1, a.t().dim(1), a.t().dim(2)});
  for (long i = 0; i < TF; ++i) out[i] = std::hypot(a.t()[i], a.t()[TF + i]);
  auto holder = std::make_shared<const Tensor>(std::move(out));
  if (!a.tracked()) return Tape::constant(holder);
  int ai = a.node;
  auto av = a.value;
  return t.adopt(holder, [ai, av, holder, TF](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(ai)) {
      for (long i = 0; i < TF; ++i) {
        double m = (*holder)[i];
        if (m > 0.0) {
          (*ga)[i] += g[i] * (*av)[i] / m;
          (*ga)[TF + i] += g[i] * (*av)[TF + i] / m;
        }
      }
    }
  });
}

Var complex_mul(Tape& t, const Var& a, const Var& b) {
  require(a.t().rank() == 3 && a.t().dim(0) == 2, "complex_mul: operands must be {2,T,F}");
  require(a.t().same_shape(b.t()), "complex_mul: shapes differ");
  const long TF = a.t().dim(1) * a.t().dim(2);
  Tensor out(a.t().shape());
  for (long i = 0; i < TF; ++i) {
    double ar = a.t()[i], ai_ = a.t()[TF + i];
    double br = b.t()[i], bi_ = b.t()[TF + i];
    out[i] = ar * br - ai_ * bi_;
    out[TF + i] = ar * bi_ + ai_ * br;
  }
  if (!any_tracked({&a, &b})) return Tape::constant(std::move(out));
  int an = a.node, bn = b.node;
  auto av = a.value, bv = b.value;
  return t.record(std::move(out), [an, bn, av, bv, TF](Tape& tp, const Tensor& g) {
    Tensor* ga = tp.grad_slot(an);
    Tensor* gb = tp.grad_slot(bn);
    for (long i = 0; i < TF; ++i) {
      double gr = g[i], gi = g[TF + i];
      if (ga) {
        (*ga)[i] += gr * (*bv)[i] + gi * (*bv)[TF + i];
        (*ga)[TF + i] += -gr * (*bv)[TF + i] + gi * (*bv)[i];
      }
      if (gb) {
        (*gb)[i] += gr * (*av)[i] + gi * (*av)[TF + i];
        (*gb)[TF + i] += -gr * (*av)[TF + i] + gi * (*av)[i];
      }
    }
  });
}

Var compress_complex(Tape& t, const Var& a, double c) {
  require(a.t().rank() == 3 && a.t().dim(0) == 2, "compress_complex: input must be {2,T,F}");
  require(c > 0.0 && c <= 1.0, "compress_complex: exponent must be in (0, 1]");
  const long TF = a.t().dim(1) * a.t().dim(2);
  Tensor out(a.t().shape());
  for (long i = 0; i < TF; ++i) {
    double re = a.t()[i], im = a.t()[TF + i];
    double m = std::hypot(re, im);
    double s = m > 0.0 ? std::pow(m, c - 1.0) : 0.0;
    out[i] = re * s;
    out[TF + i] = im * s;
  }
  if (!a.tracked()) return Tape::constant(std::move(out));
  int an = a.node;
  auto av = a.value;
  return t.record(std::move(out), [an, av, c, TF](Tape& tp, const Tensor& g) {
    if (Tensor* ga = tp.grad_slot(an)) {
      for (long i = 0; i < TF; ++i) {
        double re = (*av)[i], im = (*av)[TF + i];
        double m = std::hypot(re, im);
        if (m <= 0.0) continue;  // zero-magnitude subgradient defined as 0
        double p1 = std::pow(m, c - 1.0);
        double p3 = (c - 1.0) * std::pow(m, c - 3.0);
        double gr = g[i], gi = g[TF + i];
        (*ga)[i] += gr * (p1 + p3 * re * re) + gi * p3 * re * im;
        (*ga)[TF + i] += gr * p3 * re * im + gi * (p1 + p3 * im * im);
      }
    }
  });
}

}  // namespace forknet::ops
