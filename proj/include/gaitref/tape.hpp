#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "gaitref/error.hpp"
#include "gaitref/tensor.hpp"

namespace gaitref {

using NodeId = std::int32_t;

// Reverse-mode tape. Every operation appends one record holding the op kind,
// the input ids, the forward value and a closure that scatters the output
// cotangent into the inputs' gradient buffers. Records are appended in
// topological order (an op's inputs always exist before it), so backward() is
// a single reverse sweep that visits each record exactly once.
//
// Tensors are immutable once registered; parameters are re-registered on a
// fresh tape every step. All ops are deterministic and single-threaded.
class Tape {
 public:
  struct Record {
    const char* op;
    std::vector<NodeId> inputs;
    Tensor value;
    Tensor grad;  // empty until backward touches it
    bool requires_grad = false;
    std::function<void(Tape&, NodeId)> backward;
  };

  // ---- leaves ----

  NodeId constant(Tensor v) { return push("const", {}, std::move(v), false, nullptr); }

  NodeId param(Tensor v) { return push("param", {}, std::move(v), true, nullptr); }

  // ---- elementwise ----

  NodeId add(NodeId a, NodeId b) {
    const Tensor &ta = value(a), &tb = value(b);
    require_same_shape(ta, tb, "add");
    Tensor out(ta.shape());
    const std::int64_t n = ta.numel();
    for (std::int64_t i = 0; i < n; ++i) out.at(i) = ta.at(i) + tb.at(i);
    return push("add", {a, b}, std::move(out), any_grad({a, b}),
                [](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  t.accumulate_same(r.inputs[0], r.grad, 1.0);
                  t.accumulate_same(r.inputs[1], r.grad, 1.0);
                });
  }

  NodeId sub(NodeId a, NodeId b) {
    const Tensor &ta = value(a), &tb = value(b);
    require_same_shape(ta, tb, "sub");
    Tensor out(ta.shape());
    const std::int64_t n = ta.numel();
    for (std::int64_t i = 0; i < n; ++i) out.at(i) = ta.at(i) - tb.at(i);
    return push("sub", {a, b}, std::move(out), any_grad({a, b}),
                [](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  t.accumulate_same(r.inputs[0], r.grad, 1.0);
                  t.accumulate_same(r.inputs[1], r.grad, -1.0);
                });
  }

  NodeId mul(NodeId a, NodeId b) {
    const Tensor &ta = value(a), &tb = value(b);
    require_same_shape(ta, tb, "mul");
    Tensor out(ta.shape());
    const std::int64_t n = ta.numel();
    for (std::int64_t i = 0; i < n; ++i) out.at(i) = ta.at(i) * tb.at(i);
    return push("mul", {a, b}, std::move(out), any_grad({a, b}),
                [](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId a = r.inputs[0], b = r.inputs[1];
                  const std::int64_t n = r.grad.numel();
                  if (t.rec(a).requires_grad) {
                    Tensor& ga = t.grad_buffer(a);
                    const Tensor& vb = t.value(b);
                    for (std::int64_t i = 0; i < n; ++i) ga.at(i) += r.grad.at(i) * vb.at(i);
                  }
                  if (t.rec(b).requires_grad) {
                    Tensor& gb = t.grad_buffer(b);
                    const Tensor& va = t.value(a);
                    for (std::int64_t i = 0; i < n; ++i) gb.at(i) += r.grad.at(i) * va.at(i);
                  }
                });
  }

  NodeId scale(NodeId a, double c) {
    const Tensor& ta = value(a);
    Tensor out(ta.shape());
    const std::int64_t n = ta.numel();
    for (std::int64_t i = 0; i < n; ++i) out.at(i) = c * ta.at(i);
    return push("scale", {a}, std::move(out), any_grad({a}),
                [c](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  t.accumulate_same(r.inputs[0], r.grad, c);
                });
  }

  NodeId add_scalar(NodeId a, double c) {
    const Tensor& ta = value(a);
    Tensor out(ta.shape());
    const std::int64_t n = ta.numel();
    for (std::int64_t i = 0; i < n; ++i) out.at(i) = ta.at(i) + c;
    return push("add_scalar", {a}, std::move(out), any_grad({a}),
                [](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  t.accumulate_same(r.inputs[0], r.grad, 1.0);
                });
  }

  // Elementwise sum of any number of same-shape tensors in one record.
  NodeId add_n(const std::vector<NodeId>& ids) {
    if (ids.empty()) throw ContractError("add_n requires at least one input");
    const Tensor& t0 = value(ids[0]);
    Tensor out = t0;
    for (std::size_t k = 1; k < ids.size(); ++k) {
      const Tensor& tk = value(ids[k]);
      require_same_shape(t0, tk, "add_n");
      const std::int64_t n = out.numel();
      for (std::int64_t i = 0; i < n; ++i) out.at(i) += tk.at(i);
    }
    return push("add_n", ids, std::move(out), any_grad(ids),
                [](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  for (NodeId in : r.inputs) t.accumulate_same(in, r.grad, 1.0);
                });
  }

  NodeId leaky_relu(NodeId a, double slope = 0.01) {
    const Tensor& ta = value(a);
    Tensor out(ta.shape());
    const std::int64_t n = ta.numel();
    for (std::int64_t i = 0; i < n; ++i) {
      const double x = ta.at(i);
      out.at(i) = x > 0.0 ? x : slope * x;
    }
    return push("leaky_relu", {a}, std::move(out), any_grad({a}),
                [slope](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId a = r.inputs[0];
                  if (!t.rec(a).requires_grad) return;
                  Tensor& ga = t.grad_buffer(a);
                  const Tensor& va = t.value(a);
                  const std::int64_t n = r.grad.numel();
                  for (std::int64_t i = 0; i < n; ++i) {
                    ga.at(i) += r.grad.at(i) * (va.at(i) > 0.0 ? 1.0 : slope);
                  }
                });
  }

  NodeId relu(NodeId a) { return leaky_relu(a, 0.0); }

  // sqrt with a zero subgradient at the origin, so distances between
  // coincident points do not produce infinities.
  NodeId safe_sqrt(NodeId a) {
    const Tensor& ta = value(a);
    Tensor out(ta.shape());
    const std::int64_t n = ta.numel();
    for (std::int64_t i = 0; i < n; ++i) {
      const double x = ta.at(i);
      if (x < 0.0) throw ContractError("safe_sqrt of negative value");
      out.at(i) = std::sqrt(x);
    }
    return push("safe_sqrt", {a}, std::move(out), any_grad({a}),
                [](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId a = r.inputs[0];
                  if (!t.rec(a).requires_grad) return;
                  Tensor& ga = t.grad_buffer(a);
                  const Tensor& va = t.value(a);
                  const std::int64_t n = r.grad.numel();
                  for (std::int64_t i = 0; i < n; ++i) {
                    if (va.at(i) > 1e-24) ga.at(i) += r.grad.at(i) * 0.5 / r.value.at(i);
                  }
                });
  }

  // ---- linear algebra ----

  NodeId matmul(NodeId a, NodeId b) {
    const Tensor &ta = value(a), &tb = value(b);
    if (ta.rank() != 2 || tb.rank() != 2) {
      throw DimensionError("matmul expects rank-2 tensors, got " + shape_str(ta.shape()) +
                           " and " + shape_str(tb.shape()));
    }
    if (ta.dim(1) != tb.dim(0)) {
      throw DimensionError("matmul inner dimensions differ: " + shape_str(ta.shape()) + " vs " +
                           shape_str(tb.shape()));
    }
    const std::int64_t m = ta.dim(0), k = ta.dim(1), n = tb.dim(1);
    Tensor out({m, n});
    const double* pa = ta.data();
    const double* pb = tb.data();
    double* po = out.data();
    for (std::int64_t i = 0; i < m; ++i) {
      for (std::int64_t kk = 0; kk < k; ++kk) {
        const double av = pa[i * k + kk];
        if (av == 0.0) continue;
        const double* brow = pb + kk * n;
        double* orow = po + i * n;
        for (std::int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
      }
    }
    return push("matmul", {a, b}, std::move(out), any_grad({a, b}),
                [m, k, n](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId a = r.inputs[0], b = r.inputs[1];
                  const double* pg = r.grad.data();
                  if (t.rec(a).requires_grad) {
                    double* pga = t.grad_buffer(a).data();
                    const double* pb = t.value(b).data();
                    // da[i,kk] = dot(g[i,:], b[kk,:])
                    for (std::int64_t i = 0; i < m; ++i) {
                      for (std::int64_t kk = 0; kk < k; ++kk) {
                        double acc = 0.0;
                        const double* grow = pg + i * n;
                        const double* brow = pb + kk * n;
                        for (std::int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                        pga[i * k + kk] += acc;
                      }
                    }
                  }
                  if (t.rec(b).requires_grad) {
                    double* pgb = t.grad_buffer(b).data();
                    const double* pa = t.value(a).data();
                    // db[kk,:] += a[i,kk] * g[i,:]
                    for (std::int64_t i = 0; i < m; ++i) {
                      const double* grow = pg + i * n;
                      for (std::int64_t kk = 0; kk < k; ++kk) {
                        const double av = pa[i * k + kk];
                        if (av == 0.0) continue;
                        double* brow = pgb + kk * n;
                        for (std::int64_t j = 0; j < n; ++j) brow[j] += av * grow[j];
                      }
                    }
                  }
                });
  }

  // Batched matmul: a is P×m×k, b is P×k×n.
  NodeId bmm(NodeId a, NodeId b) {
    const Tensor &ta = value(a), &tb = value(b);
    if (ta.rank() != 3 || tb.rank() != 3 || ta.dim(0) != tb.dim(0) || ta.dim(2) != tb.dim(1)) {
      throw DimensionError("bmm shape mismatch: " + shape_str(ta.shape()) + " vs " +
                           shape_str(tb.shape()));
    }
    const std::int64_t p = ta.dim(0), m = ta.dim(1), k = ta.dim(2), n = tb.dim(2);
    Tensor out({p, m, n});
    for (std::int64_t q = 0; q < p; ++q) {
      const double* pa = ta.data() + q * m * k;
      const double* pb = tb.data() + q * k * n;
      double* po = out.data() + q * m * n;
      for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t kk = 0; kk < k; ++kk) {
          const double av = pa[i * k + kk];
          if (av == 0.0) continue;
          const double* brow = pb + kk * n;
          double* orow = po + i * n;
          for (std::int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
      }
    }
    return push("bmm", {a, b}, std::move(out), any_grad({a, b}),
                [p, m, k, n](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId a = r.inputs[0], b = r.inputs[1];
                  for (std::int64_t q = 0; q < p; ++q) {
                    const double* pg = r.grad.data() + q * m * n;
                    if (t.rec(a).requires_grad) {
                      double* pga = t.grad_buffer(a).data() + q * m * k;
                      const double* pb = t.value(b).data() + q * k * n;
                      for (std::int64_t i = 0; i < m; ++i) {
                        for (std::int64_t kk = 0; kk < k; ++kk) {
                          double acc = 0.0;
                          for (std::int64_t j = 0; j < n; ++j) {
                            acc += pg[i * n + j] * pb[kk * n + j];
                          }
                          pga[i * k + kk] += acc;
                        }
                      }
                    }
                    if (t.rec(b).requires_grad) {
                      double* pgb = t.grad_buffer(b).data() + q * k * n;
                      const double* pa = t.value(a).data() + q * m * k;
                      for (std::int64_t i = 0; i < m; ++i) {
                        for (std::int64_t kk = 0; kk < k; ++kk) {
                          const double av = pa[i * k + kk];
                          if (av == 0.0) continue;
                          for (std::int64_t j = 0; j < n; ++j) {
                            pgb[kk * n + j] += av * pg[i * n + j];
                          }
                        }
                      }
                    }
                  }
                });
  }

  // Broadcast-add a length-C bias over the last axis.
  NodeId bias_last(NodeId x, NodeId b) {
    const Tensor &tx = value(x), &tb = value(b);
    const std::int64_t c = tx.dim(tx.rank() - 1);
    if (tb.rank() != 1 || tb.dim(0) != c) {
      throw DimensionError("bias_last: bias " + shape_str(tb.shape()) + " does not match " +
                           shape_str(tx.shape()));
    }
    Tensor out(tx.shape());
    const std::int64_t rows = tx.numel() / c;
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t j = 0; j < c; ++j) out.at(r * c + j) = tx.at(r * c + j) + tb.at(j);
    }
    return push("bias_last", {x, b}, std::move(out), any_grad({x, b}),
                [rows, c](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  t.accumulate_same(r.inputs[0], r.grad, 1.0);
                  if (t.rec(r.inputs[1]).requires_grad) {
                    Tensor& gb = t.grad_buffer(r.inputs[1]);
                    for (std::int64_t row = 0; row < rows; ++row) {
                      for (std::int64_t j = 0; j < c; ++j) gb.at(j) += r.grad.at(row * c + j);
                    }
                  }
                });
  }

  // Broadcast-add a length-C bias over channel axis 0 of a C×H×W map.
  NodeId bias_channel(NodeId x, NodeId b) {
    const Tensor &tx = value(x), &tb = value(b);
    if (tx.rank() != 3 || tb.rank() != 1 || tb.dim(0) != tx.dim(0)) {
      throw DimensionError("bias_channel: bias " + shape_str(tb.shape()) + " does not match " +
                           shape_str(tx.shape()));
    }
    const std::int64_t c = tx.dim(0), hw = tx.dim(1) * tx.dim(2);
    Tensor out(tx.shape());
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const double bv = tb.at(ch);
      for (std::int64_t i = 0; i < hw; ++i) out.at(ch * hw + i) = tx.at(ch * hw + i) + bv;
    }
    return push("bias_channel", {x, b}, std::move(out), any_grad({x, b}),
                [c, hw](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  t.accumulate_same(r.inputs[0], r.grad, 1.0);
                  if (t.rec(r.inputs[1]).requires_grad) {
                    Tensor& gb = t.grad_buffer(r.inputs[1]);
                    for (std::int64_t ch = 0; ch < c; ++ch) {
                      double acc = 0.0;
                      for (std::int64_t i = 0; i < hw; ++i) acc += r.grad.at(ch * hw + i);
                      gb.at(ch) += acc;
                    }
                  }
                });
  }

  // ---- convolutions ----

  // x: Cin×H×W, w: Cout×Cin×kh×kw. Output H' = (H + 2 pad - kh) / stride + 1,
  // which must divide exactly; a fractional output size is a dimension error.
  NodeId conv2d(NodeId x, NodeId w, std::int64_t stride, std::int64_t pad) {
    const Tensor &tx = value(x), &tw = value(w);
    if (tx.rank() != 3 || tw.rank() != 4) {
      throw DimensionError("conv2d expects Cin×H×W input and Cout×Cin×kh×kw kernel");
    }
    if (tw.dim(1) != tx.dim(0)) {
      throw DimensionError("conv2d channel mismatch: input " + shape_str(tx.shape()) +
                           ", kernel " + shape_str(tw.shape()));
    }
    if (stride < 1 || pad < 0) throw DimensionError("conv2d: bad stride/pad");
    const std::int64_t ci = tx.dim(0), h = tx.dim(1), ww = tx.dim(2);
    const std::int64_t co = tw.dim(0), kh = tw.dim(2), kw = tw.dim(3);
    if (kh > h + 2 * pad || kw > ww + 2 * pad) {
      throw DimensionError("conv2d kernel larger than padded input");
    }
    if ((h + 2 * pad - kh) % stride != 0 || (ww + 2 * pad - kw) % stride != 0) {
      throw DimensionError("conv2d: non-integral output size for input " + shape_str(tx.shape()) +
                           ", kernel " + shape_str(tw.shape()) + ", stride " +
                           std::to_string(stride) + ", pad " + std::to_string(pad));
    }
    const std::int64_t ho = (h + 2 * pad - kh) / stride + 1;
    const std::int64_t wo = (ww + 2 * pad - kw) / stride + 1;
    Tensor out({co, ho, wo});
    conv2d_forward(tx.data(), tw.data(), out.data(), ci, h, ww, co, kh, kw, stride, pad, ho, wo);
    return push("conv2d", {x, w}, std::move(out), any_grad({x, w}),
                [ci, h, ww, co, kh, kw, stride, pad, ho, wo](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId x = r.inputs[0], w = r.inputs[1];
                  if (t.rec(x).requires_grad) {
                    conv2d_backward_input(t.grad_buffer(x).data(), t.value(w).data(),
                                          r.grad.data(), ci, h, ww, co, kh, kw, stride, pad, ho,
                                          wo);
                  }
                  if (t.rec(w).requires_grad) {
                    conv2d_backward_kernel(t.value(x).data(), t.grad_buffer(w).data(),
                                           r.grad.data(), ci, h, ww, co, kh, kw, stride, pad, ho,
                                           wo);
                  }
                });
  }

  // Per-node 1-D convolution over the frame axis with same padding.
  // x: N×K×Cin, w: Cout×kt×Cin (kt odd), output N×K×Cout.
  NodeId temporal_conv(NodeId x, NodeId w) {
    const Tensor &tx = value(x), &tw = value(w);
    if (tx.rank() != 3 || tw.rank() != 3) {
      throw DimensionError("temporal_conv expects N×K×Cin input and Cout×kt×Cin kernel");
    }
    if (tw.dim(2) != tx.dim(2)) {
      throw DimensionError("temporal_conv channel mismatch: input " + shape_str(tx.shape()) +
                           ", kernel " + shape_str(tw.shape()));
    }
    const std::int64_t n = tx.dim(0), k = tx.dim(1), ci = tx.dim(2);
    const std::int64_t co = tw.dim(0), kt = tw.dim(1);
    if (kt % 2 == 0) throw DimensionError("temporal_conv kernel must be odd for same padding");
    Tensor out({n, k, co});
    const std::int64_t off = kt / 2;
    const double* px = tx.data();
    const double* pw = tw.data();
    double* po = out.data();
    for (std::int64_t f = 0; f < n; ++f) {
      const std::int64_t t_lo = std::max<std::int64_t>(0, off - f);
      const std::int64_t t_hi = std::min<std::int64_t>(kt, n - f + off);
      for (std::int64_t j = 0; j < k; ++j) {
        double* orow = po + (f * k + j) * co;
        for (std::int64_t c = 0; c < co; ++c) {
          double acc = 0.0;
          for (std::int64_t tt = t_lo; tt < t_hi; ++tt) {
            const double* xrow = px + ((f + tt - off) * k + j) * ci;
            const double* wrow = pw + (c * kt + tt) * ci;
            for (std::int64_t q = 0; q < ci; ++q) acc += xrow[q] * wrow[q];
          }
          orow[c] = acc;
        }
      }
    }
    return push("temporal_conv", {x, w}, std::move(out), any_grad({x, w}),
                [n, k, ci, co, kt](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId x = r.inputs[0], w = r.inputs[1];
                  const std::int64_t off = kt / 2;
                  const double* pg = r.grad.data();
                  const bool need_x = t.rec(x).requires_grad;
                  const bool need_w = t.rec(w).requires_grad;
                  double* pgx = need_x ? t.grad_buffer(x).data() : nullptr;
                  double* pgw = need_w ? t.grad_buffer(w).data() : nullptr;
                  const double* pw = t.value(w).data();
                  const double* px = t.value(x).data();
                  for (std::int64_t f = 0; f < n; ++f) {
                    const std::int64_t t_lo = std::max<std::int64_t>(0, off - f);
                    const std::int64_t t_hi = std::min<std::int64_t>(kt, n - f + off);
                    for (std::int64_t j = 0; j < k; ++j) {
                      const double* grow = pg + (f * k + j) * co;
                      for (std::int64_t c = 0; c < co; ++c) {
                        const double gv = grow[c];
                        if (gv == 0.0) continue;
                        for (std::int64_t tt = t_lo; tt < t_hi; ++tt) {
                          const std::int64_t src = ((f + tt - off) * k + j) * ci;
                          if (need_x) {
                            const double* wrow = pw + (c * kt + tt) * ci;
                            for (std::int64_t q = 0; q < ci; ++q) pgx[src + q] += gv * wrow[q];
                          }
                          if (need_w) {
                            double* wgrow = pgw + (c * kt + tt) * ci;
                            for (std::int64_t q = 0; q < ci; ++q) wgrow[q] += gv * px[src + q];
                          }
                        }
                      }
                    }
                  }
                });
  }

  // Mixes node features by a (constant) K×K matrix: y[n,k,:] = sum_j A[k,j] x[n,j,:].
  NodeId graph_mix(NodeId x, NodeId adj) {
    const Tensor &tx = value(x), &ta = value(adj);
    if (tx.rank() != 3 || ta.rank() != 2 || ta.dim(0) != ta.dim(1) || ta.dim(0) != tx.dim(1)) {
      throw DimensionError("graph_mix: input " + shape_str(tx.shape()) + " vs adjacency " +
                           shape_str(ta.shape()));
    }
    const std::int64_t n = tx.dim(0), k = tx.dim(1), c = tx.dim(2);
    Tensor out({n, k, c});
    const double* px = tx.data();
    const double* pa = ta.data();
    double* po = out.data();
    for (std::int64_t f = 0; f < n; ++f) {
      for (std::int64_t i = 0; i < k; ++i) {
        double* orow = po + (f * k + i) * c;
        for (std::int64_t j = 0; j < k; ++j) {
          const double av = pa[i * k + j];
          if (av == 0.0) continue;
          const double* xrow = px + (f * k + j) * c;
          for (std::int64_t q = 0; q < c; ++q) orow[q] += av * xrow[q];
        }
      }
    }
    return push("graph_mix", {x, adj}, std::move(out), any_grad({x, adj}),
                [n, k, c](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId x = r.inputs[0], adj = r.inputs[1];
                  if (t.rec(x).requires_grad) {
                    double* pgx = t.grad_buffer(x).data();
                    const double* pa = t.value(adj).data();
                    const double* pg = r.grad.data();
                    for (std::int64_t f = 0; f < n; ++f) {
                      for (std::int64_t i = 0; i < k; ++i) {
                        const double* grow = pg + (f * k + i) * c;
                        for (std::int64_t j = 0; j < k; ++j) {
                          const double av = pa[i * k + j];
                          if (av == 0.0) continue;
                          double* xrow = pgx + (f * k + j) * c;
                          for (std::int64_t q = 0; q < c; ++q) xrow[q] += av * grow[q];
                        }
                      }
                    }
                  }
                  // adjacency is a constant in this model; no dA path
                });
  }

  // ---- shape ops ----

  NodeId reshape(NodeId x, Shape shape) {
    const Tensor& tx = value(x);
    if (shape_numel(shape) != tx.numel()) {
      throw DimensionError("reshape " + shape_str(tx.shape()) + " -> " + shape_str(shape) +
                           " changes element count");
    }
    Tensor out(std::move(shape), tx.values());
    return push("reshape", {x}, std::move(out), any_grad({x}),
                [](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  t.accumulate_same(r.inputs[0], r.grad, 1.0);  // layouts coincide
                });
  }

  NodeId concat(const std::vector<NodeId>& ids, int axis) {
    if (ids.empty()) throw ContractError("concat requires at least one input");
    const Tensor& t0 = value(ids[0]);
    if (axis < 0 || axis >= t0.rank()) throw DimensionError("concat: bad axis");
    Shape out_shape = t0.shape();
    std::int64_t total = 0;
    for (NodeId id : ids) {
      const Tensor& ti = value(id);
      if (ti.rank() != t0.rank()) throw DimensionError("concat: rank mismatch");
      for (int d = 0; d < t0.rank(); ++d) {
        if (d != axis && ti.dim(d) != t0.dim(d)) {
          throw DimensionError("concat: shape mismatch at axis " + std::to_string(d) + ": " +
                               shape_str(ti.shape()) + " vs " + shape_str(t0.shape()));
        }
      }
      total += ti.dim(axis);
    }
    out_shape[static_cast<std::size_t>(axis)] = total;
    Tensor out(out_shape);
    std::int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= t0.dim(d);
    for (int d = axis + 1; d < t0.rank(); ++d) inner *= t0.dim(d);
    std::int64_t pos = 0;
    for (NodeId id : ids) {
      const Tensor& ti = value(id);
      const std::int64_t block = ti.dim(axis) * inner;
      for (std::int64_t o = 0; o < outer; ++o) {
        std::copy(ti.data() + o * block, ti.data() + (o + 1) * block,
                  out.data() + o * total * inner + pos);
      }
      pos += block;
    }
    return push("concat", ids, std::move(out), any_grad(ids),
                [outer, inner, total](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  std::int64_t pos = 0;
                  for (NodeId id : r.inputs) {
                    const Tensor& vi = t.value(id);
                    const std::int64_t block = vi.numel() / outer;
                    if (t.rec(id).requires_grad) {
                      Tensor& gi = t.grad_buffer(id);
                      for (std::int64_t o = 0; o < outer; ++o) {
                        const double* src = r.grad.data() + o * total * inner + pos;
                        double* dst = gi.data() + o * block;
                        for (std::int64_t q = 0; q < block; ++q) dst[q] += src[q];
                      }
                    }
                    pos += block;
                  }
                });
  }

  NodeId slice(NodeId x, int axis, std::int64_t start, std::int64_t len) {
    const Tensor& tx = value(x);
    if (axis < 0 || axis >= tx.rank()) throw DimensionError("slice: bad axis");
    if (start < 0 || len < 1 || start + len > tx.dim(axis)) {
      throw DimensionError("slice: range [" + std::to_string(start) + ", " +
                           std::to_string(start + len) + ") out of bounds for " +
                           shape_str(tx.shape()));
    }
    Shape out_shape = tx.shape();
    out_shape[static_cast<std::size_t>(axis)] = len;
    std::int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= tx.dim(d);
    for (int d = axis + 1; d < tx.rank(); ++d) inner *= tx.dim(d);
    const std::int64_t d_in = tx.dim(axis);
    Tensor out(out_shape);
    for (std::int64_t o = 0; o < outer; ++o) {
      std::copy(tx.data() + (o * d_in + start) * inner, tx.data() + (o * d_in + start + len) * inner,
                out.data() + o * len * inner);
    }
    return push("slice", {x}, std::move(out), any_grad({x}),
                [outer, inner, d_in, start, len](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId x = r.inputs[0];
                  if (!t.rec(x).requires_grad) return;
                  Tensor& gx = t.grad_buffer(x);
                  for (std::int64_t o = 0; o < outer; ++o) {
                    const double* src = r.grad.data() + o * len * inner;
                    double* dst = gx.data() + (o * d_in + start) * inner;
                    for (std::int64_t q = 0; q < len * inner; ++q) dst[q] += src[q];
                  }
                });
  }

  // Broadcast-repeat: tiles the tensor `times` copies along an existing axis,
  // [x; x; ...] block order.
  NodeId tile(NodeId x, int axis, std::int64_t times) {
    const Tensor& tx = value(x);
    if (axis < 0 || axis >= tx.rank()) throw DimensionError("tile: bad axis");
    if (times < 1) throw DimensionError("tile: times must be >= 1");
    Shape out_shape = tx.shape();
    out_shape[static_cast<std::size_t>(axis)] *= times;
    std::int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= tx.dim(d);
    for (int d = axis + 1; d < tx.rank(); ++d) inner *= tx.dim(d);
    const std::int64_t block = tx.dim(axis) * inner;
    Tensor out(out_shape);
    for (std::int64_t o = 0; o < outer; ++o) {
      for (std::int64_t r = 0; r < times; ++r) {
        std::copy(tx.data() + o * block, tx.data() + (o + 1) * block,
                  out.data() + (o * times + r) * block);
      }
    }
    return push("tile", {x}, std::move(out), any_grad({x}),
                [outer, block, times](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId x = r.inputs[0];
                  if (!t.rec(x).requires_grad) return;
                  Tensor& gx = t.grad_buffer(x);
                  for (std::int64_t o = 0; o < outer; ++o) {
                    double* dst = gx.data() + o * block;
                    for (std::int64_t rep = 0; rep < times; ++rep) {
                      const double* src = r.grad.data() + (o * times + rep) * block;
                      for (std::int64_t q = 0; q < block; ++q) dst[q] += src[q];
                    }
                  }
                });
  }

  // ---- reductions ----

  // Max over one axis; ties route the gradient to the lowest index.
  NodeId max_over_axis(NodeId x, int axis) {
    const Tensor& tx = value(x);
    if (axis < 0 || axis >= tx.rank()) throw DimensionError("max_over_axis: bad axis");
    std::int64_t outer = 1, inner = 1;
    const std::int64_t reduce = tx.dim(axis);
    for (int d = 0; d < axis; ++d) outer *= tx.dim(d);
    for (int d = axis + 1; d < tx.rank(); ++d) inner *= tx.dim(d);
    Shape out_shape = reduced_shape(tx.shape(), {axis});
    Tensor out(out_shape);
    std::vector<std::int64_t> argmax(static_cast<std::size_t>(outer * inner));
    for (std::int64_t o = 0; o < outer; ++o) {
      for (std::int64_t i = 0; i < inner; ++i) {
        double best = tx.at((o * reduce) * inner + i);
        std::int64_t best_a = 0;
        for (std::int64_t a = 1; a < reduce; ++a) {
          const double v = tx.at((o * reduce + a) * inner + i);
          if (v > best) {
            best = v;
            best_a = a;
          }
        }
        out.at(o * inner + i) = best;
        argmax[static_cast<std::size_t>(o * inner + i)] = (o * reduce + best_a) * inner + i;
      }
    }
    return push("max_over_axis", {x}, std::move(out), any_grad({x}),
                [argmax = std::move(argmax)](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId x = r.inputs[0];
                  if (!t.rec(x).requires_grad) return;
                  Tensor& gx = t.grad_buffer(x);
                  for (std::size_t i = 0; i < argmax.size(); ++i) {
                    gx.at(argmax[i]) += r.grad.at(static_cast<std::int64_t>(i));
                  }
                });
  }

  // 2×2 max pooling with stride 2 on a C×H×W map; H and W must be even.
  // Ties route the gradient to the lowest flat index in the window.
  NodeId max_pool2x2(NodeId x) {
    const Tensor& tx = value(x);
    if (tx.rank() != 3) throw DimensionError("max_pool2x2 expects C×H×W");
    const std::int64_t c = tx.dim(0), h = tx.dim(1), w = tx.dim(2);
    if (h % 2 != 0 || w % 2 != 0) {
      throw DimensionError("max_pool2x2: odd spatial size " + shape_str(tx.shape()));
    }
    const std::int64_t ho = h / 2, wo = w / 2;
    Tensor out({c, ho, wo});
    std::vector<std::int64_t> argmax(static_cast<std::size_t>(c * ho * wo));
    for (std::int64_t ch = 0; ch < c; ++ch) {
      for (std::int64_t r = 0; r < ho; ++r) {
        for (std::int64_t q = 0; q < wo; ++q) {
          const std::int64_t base = (ch * h + 2 * r) * w + 2 * q;
          std::int64_t best_i = base;
          double best = tx.at(base);
          const std::int64_t cand[3] = {base + 1, base + w, base + w + 1};
          for (std::int64_t idx : cand) {
            if (tx.at(idx) > best) {
              best = tx.at(idx);
              best_i = idx;
            }
          }
          out.at((ch * ho + r) * wo + q) = best;
          argmax[static_cast<std::size_t>((ch * ho + r) * wo + q)] = best_i;
        }
      }
    }
    return push("max_pool2x2", {x}, std::move(out), any_grad({x}),
                [argmax = std::move(argmax)](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId x = r.inputs[0];
                  if (!t.rec(x).requires_grad) return;
                  Tensor& gx = t.grad_buffer(x);
                  for (std::size_t i = 0; i < argmax.size(); ++i) {
                    gx.at(argmax[i]) += r.grad.at(static_cast<std::int64_t>(i));
                  }
                });
  }

  NodeId sum_over_axes(NodeId x, const std::vector<int>& axes) {
    return reduce_over_axes(x, axes, false);
  }

  NodeId mean_over_axes(NodeId x, const std::vector<int>& axes) {
    return reduce_over_axes(x, axes, true);
  }

  NodeId sum_all(NodeId x) {
    std::vector<int> axes(static_cast<std::size_t>(value(x).rank()));
    for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = static_cast<int>(i);
    return reduce_over_axes(x, axes, false);
  }

  // ---- probability ----

  // Row-wise softmax over the last axis.
  NodeId softmax(NodeId x) {
    const Tensor& tx = value(x);
    const std::int64_t c = tx.dim(tx.rank() - 1);
    const std::int64_t rows = tx.numel() / c;
    Tensor out(tx.shape());
    for (std::int64_t r = 0; r < rows; ++r) {
      const double* xr = tx.data() + r * c;
      double* yr = out.data() + r * c;
      double mx = xr[0];
      for (std::int64_t j = 1; j < c; ++j) mx = std::max(mx, xr[j]);
      double z = 0.0;
      for (std::int64_t j = 0; j < c; ++j) {
        yr[j] = std::exp(xr[j] - mx);
        z += yr[j];
      }
      for (std::int64_t j = 0; j < c; ++j) yr[j] /= z;
    }
    return push("softmax", {x}, std::move(out), any_grad({x}),
                [rows, c](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId x = r.inputs[0];
                  if (!t.rec(x).requires_grad) return;
                  Tensor& gx = t.grad_buffer(x);
                  for (std::int64_t row = 0; row < rows; ++row) {
                    const double* y = r.value.data() + row * c;
                    const double* g = r.grad.data() + row * c;
                    double dot = 0.0;
                    for (std::int64_t j = 0; j < c; ++j) dot += g[j] * y[j];
                    double* gxr = gx.data() + row * c;
                    for (std::int64_t j = 0; j < c; ++j) gxr[j] += y[j] * (g[j] - dot);
                  }
                });
  }

  // Mean softmax cross-entropy of logits (B×n) against integer labels.
  NodeId cross_entropy_logits(NodeId logits, const std::vector<std::int64_t>& labels) {
    const Tensor& tl = value(logits);
    if (tl.rank() != 2) throw DimensionError("cross_entropy_logits expects B×n logits");
    const std::int64_t b = tl.dim(0), n = tl.dim(1);
    if (static_cast<std::int64_t>(labels.size()) != b) {
      throw ContractError("cross_entropy_logits: label count mismatch");
    }
    std::vector<double> probs(static_cast<std::size_t>(b * n));
    double loss = 0.0;
    for (std::int64_t r = 0; r < b; ++r) {
      const std::int64_t label = labels[static_cast<std::size_t>(r)];
      if (label < 0 || label >= n) throw ContractError("cross_entropy_logits: label out of range");
      const double* xr = tl.data() + r * n;
      double mx = xr[0];
      for (std::int64_t j = 1; j < n; ++j) mx = std::max(mx, xr[j]);
      double z = 0.0;
      for (std::int64_t j = 0; j < n; ++j) {
        probs[static_cast<std::size_t>(r * n + j)] = std::exp(xr[j] - mx);
        z += probs[static_cast<std::size_t>(r * n + j)];
      }
      for (std::int64_t j = 0; j < n; ++j) probs[static_cast<std::size_t>(r * n + j)] /= z;
      loss += std::log(z) + mx - xr[label];
    }
    loss /= static_cast<double>(b);
    return push("cross_entropy_logits", {logits}, Tensor::scalar(loss), any_grad({logits}),
                [probs = std::move(probs), labels, b, n](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId logits = r.inputs[0];
                  if (!t.rec(logits).requires_grad) return;
                  Tensor& gl = t.grad_buffer(logits);
                  const double gv = r.grad.at(0) / static_cast<double>(b);
                  for (std::int64_t row = 0; row < b; ++row) {
                    for (std::int64_t j = 0; j < n; ++j) {
                      double p = probs[static_cast<std::size_t>(row * n + j)];
                      if (j == labels[static_cast<std::size_t>(row)]) p -= 1.0;
                      gl.at(row * n + j) += gv * p;
                    }
                  }
                });
  }

  // ---- execution ----

  void backward(NodeId loss) {
    if (value(loss).numel() != 1) {
      throw ContractError("backward requires a scalar loss, got " +
                          shape_str(value(loss).shape()));
    }
    grad_buffer(loss).at(0) = 1.0;
    for (NodeId id = loss; id >= 0; --id) {
      Record& r = records_[static_cast<std::size_t>(id)];
      if (r.grad.numel() == 0 || !r.backward) continue;
      r.backward(*this, id);
    }
  }

  const Tensor& value(NodeId id) const { return rec(id).value; }

  // Gradient of the last backward() w.r.t. this node; zeros if the node was
  // not reached.
  Tensor gradient(NodeId id) const {
    const Record& r = rec(id);
    if (r.grad.numel() == 0) return Tensor(r.value.shape());
    return r.grad;
  }

  bool has_gradient(NodeId id) const { return rec(id).grad.numel() != 0; }

  std::size_t size() const { return records_.size(); }
  const Record& record(NodeId id) const { return rec(id); }

  // When enabled, each op verifies its output is finite.
  void set_check_finite(bool on) { check_finite_ = on; }

 private:
  friend struct TapeTestAccess;

  static void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
      throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                           shape_str(b.shape()));
    }
  }

  static Shape reduced_shape(const Shape& in, const std::vector<int>& axes) {
    Shape out;
    for (int d = 0; d < static_cast<int>(in.size()); ++d) {
      if (std::find(axes.begin(), axes.end(), d) == axes.end()) {
        out.push_back(in[static_cast<std::size_t>(d)]);
      }
    }
    if (out.empty()) out.push_back(1);
    return out;
  }

  NodeId reduce_over_axes(NodeId x, std::vector<int> axes, bool mean) {
    const Tensor& tx = value(x);
    if (axes.empty()) throw DimensionError("reduction requires at least one axis");
    std::sort(axes.begin(), axes.end());
    for (std::size_t i = 0; i < axes.size(); ++i) {
      if (axes[i] < 0 || axes[i] >= tx.rank()) throw DimensionError("reduction: bad axis");
      if (i > 0 && axes[i] == axes[i - 1]) throw DimensionError("reduction: duplicate axis");
    }
    Shape out_shape = reduced_shape(tx.shape(), axes);
    Tensor out(out_shape);
    std::int64_t count = 1;
    for (int a : axes) count *= tx.dim(a);

    // Per-dimension output strides; reduced dims contribute stride 0.
    const int rank = tx.rank();
    std::vector<std::int64_t> out_stride(static_cast<std::size_t>(rank), 0);
    {
      std::int64_t s = 1;
      for (int d = rank - 1; d >= 0; --d) {
        if (std::find(axes.begin(), axes.end(), d) == axes.end()) {
          out_stride[static_cast<std::size_t>(d)] = s;
          s *= tx.dim(d);
        }
      }
    }
    std::vector<std::int64_t> in_dims(tx.shape().begin(), tx.shape().end());
    const std::int64_t n = tx.numel();
    std::vector<std::int64_t> coord(static_cast<std::size_t>(rank), 0);
    for (std::int64_t flat = 0; flat < n; ++flat) {
      std::int64_t oi = 0;
      for (int d = 0; d < rank; ++d) oi += coord[static_cast<std::size_t>(d)] * out_stride[static_cast<std::size_t>(d)];
      out.at(oi) += tx.at(flat);
      for (int d = rank - 1; d >= 0; --d) {
        if (++coord[static_cast<std::size_t>(d)] < in_dims[static_cast<std::size_t>(d)]) break;
        coord[static_cast<std::size_t>(d)] = 0;
      }
    }
    if (mean) {
      for (std::int64_t i = 0; i < out.numel(); ++i) out.at(i) /= static_cast<double>(count);
    }
    const double w = mean ? 1.0 / static_cast<double>(count) : 1.0;
    return push(mean ? "mean_over_axes" : "sum_over_axes", {x}, std::move(out), any_grad({x}),
                [out_stride, in_dims, rank, w](Tape& t, NodeId self) {
                  const Record& r = t.rec(self);
                  const NodeId x = r.inputs[0];
                  if (!t.rec(x).requires_grad) return;
                  Tensor& gx = t.grad_buffer(x);
                  const std::int64_t n = gx.numel();
                  std::vector<std::int64_t> coord(static_cast<std::size_t>(rank), 0);
                  for (std::int64_t flat = 0; flat < n; ++flat) {
                    std::int64_t oi = 0;
                    for (int d = 0; d < rank; ++d) {
                      oi += coord[static_cast<std::size_t>(d)] * out_stride[static_cast<std::size_t>(d)];
                    }
                    gx.at(flat) += w * r.grad.at(oi);
                    for (int d = rank - 1; d >= 0; --d) {
                      if (++coord[static_cast<std::size_t>(d)] < in_dims[static_cast<std::size_t>(d)]) break;
                      coord[static_cast<std::size_t>(d)] = 0;
                    }
                  }
                });
  }

  static void conv2d_forward(const double* x, const double* w, double* y, std::int64_t ci,
                             std::int64_t h, std::int64_t ww, std::int64_t co, std::int64_t kh,
                             std::int64_t kw, std::int64_t s, std::int64_t p, std::int64_t ho,
                             std::int64_t wo) {
    for (std::int64_t oc = 0; oc < co; ++oc) {
      for (std::int64_t ic = 0; ic < ci; ++ic) {
        const double* xch = x + ic * h * ww;
        for (std::int64_t i = 0; i < kh; ++i) {
          for (std::int64_t j = 0; j < kw; ++j) {
            const double wv = w[((oc * ci + ic) * kh + i) * kw + j];
            if (wv == 0.0) continue;
            // valid output rows/cols for this kernel offset
            const std::int64_t ho_lo = lo_bound(i, p, s);
            const std::int64_t ho_hi = hi_bound(i, p, s, h, ho);
            const std::int64_t wo_lo = lo_bound(j, p, s);
            const std::int64_t wo_hi = hi_bound(j, p, s, ww, wo);
            for (std::int64_t r = ho_lo; r < ho_hi; ++r) {
              const double* xrow = xch + (r * s + i - p) * ww + (wo_lo * s + j - p);
              double* yrow = y + (oc * ho + r) * wo + wo_lo;
              const std::int64_t cnt = wo_hi - wo_lo;
              if (s == 1) {
                for (std::int64_t q = 0; q < cnt; ++q) yrow[q] += wv * xrow[q];
              } else {
                for (std::int64_t q = 0; q < cnt; ++q) yrow[q] += wv * xrow[q * s];
              }
            }
          }
        }
      }
    }
  }

  static void conv2d_backward_input(double* gx, const double* w, const double* g, std::int64_t ci,
                                    std::int64_t h, std::int64_t ww, std::int64_t co,
                                    std::int64_t kh, std::int64_t kw, std::int64_t s,
                                    std::int64_t p, std::int64_t ho, std::int64_t wo) {
    for (std::int64_t oc = 0; oc < co; ++oc) {
      for (std::int64_t ic = 0; ic < ci; ++ic) {
        double* gxch = gx + ic * h * ww;
        for (std::int64_t i = 0; i < kh; ++i) {
          for (std::int64_t j = 0; j < kw; ++j) {
            const double wv = w[((oc * ci + ic) * kh + i) * kw + j];
            if (wv == 0.0) continue;
            const std::int64_t ho_lo = lo_bound(i, p, s);
            const std::int64_t ho_hi = hi_bound(i, p, s, h, ho);
            const std::int64_t wo_lo = lo_bound(j, p, s);
            const std::int64_t wo_hi = hi_bound(j, p, s, ww, wo);
            for (std::int64_t r = ho_lo; r < ho_hi; ++r) {
              double* xrow = gxch + (r * s + i - p) * ww + (wo_lo * s + j - p);
              const double* grow = g + (oc * ho + r) * wo + wo_lo;
              const std::int64_t cnt = wo_hi - wo_lo;
              if (s == 1) {
                for (std::int64_t q = 0; q < cnt; ++q) xrow[q] += wv * grow[q];
              } else {
                for (std::int64_t q = 0; q < cnt; ++q) xrow[q * s] += wv * grow[q];
              }
            }
          }
        }
      }
    }
  }

  static void conv2d_backward_kernel(const double* x, double* gw, const double* g, std::int64_t ci,
                                     std::int64_t h, std::int64_t ww, std::int64_t co,
                                     std::int64_t kh, std::int64_t kw, std::int64_t s,
                                     std::int64_t p, std::int64_t ho, std::int64_t wo) {
    for (std::int64_t oc = 0; oc < co; ++oc) {
      for (std::int64_t ic = 0; ic < ci; ++ic) {
        const double* xch = x + ic * h * ww;
        for (std::int64_t i = 0; i < kh; ++i) {
          for (std::int64_t j = 0; j < kw; ++j) {
            const std::int64_t ho_lo = lo_bound(i, p, s);
            const std::int64_t ho_hi = hi_bound(i, p, s, h, ho);
            const std::int64_t wo_lo = lo_bound(j, p, s);
            const std::int64_t wo_hi = hi_bound(j, p, s, ww, wo);
            double acc = 0.0;
            for (std::int64_t r = ho_lo; r < ho_hi; ++r) {
              const double* xrow = xch + (r * s + i - p) * ww + (wo_lo * s + j - p);
              const double* grow = g + (oc * ho + r) * wo + wo_lo;
              const std::int64_t cnt = wo_hi - wo_lo;
              if (s == 1) {
                for (std::int64_t q = 0; q < cnt; ++q) acc += xrow[q] * grow[q];
              } else {
                for (std::int64_t q = 0; q < cnt; ++q) acc += xrow[q * s] * grow[q];
              }
            }
            gw[((oc * ci + ic) * kh + i) * kw + j] += acc;
          }
        }
      }
    }
  }

  // First output index r with r*s + k - p >= 0.
  static std::int64_t lo_bound(std::int64_t k, std::int64_t p, std::int64_t s) {
    const std::int64_t shift = p - k;
    if (shift <= 0) return 0;
    return (shift + s - 1) / s;
  }

  // One past the last output index r with r*s + k - p <= extent-1.
  static std::int64_t hi_bound(std::int64_t k, std::int64_t p, std::int64_t s, std::int64_t extent,
                               std::int64_t out_extent) {
    const std::int64_t last = (extent - 1 + p - k) / s;
    return std::min(out_extent, last + 1);
  }

  Record& rec(NodeId id) {
    return records_[static_cast<std::size_t>(id)];
  }
  const Record& rec(NodeId id) const {
    return records_[static_cast<std::size_t>(id)];
  }

  bool any_grad(const std::vector<NodeId>& ids) const {
    for (NodeId id : ids) {
      if (rec(id).requires_grad) return true;
    }
    return false;
  }

  Tensor& grad_buffer(NodeId id) {
    Record& r = rec(id);
    if (r.grad.numel() == 0) r.grad = Tensor(r.value.shape());
    return r.grad;
  }

  // dst_grad += c * g where shapes match element count.
  void accumulate_same(NodeId id, const Tensor& g, double c) {
    if (!rec(id).requires_grad) return;
    Tensor& dst = grad_buffer(id);
    const std::int64_t n = dst.numel();
    if (c == 1.0) {
      for (std::int64_t i = 0; i < n; ++i) dst.at(i) += g.at(i);
    } else {
      for (std::int64_t i = 0; i < n; ++i) dst.at(i) += c * g.at(i);
    }
  }

  NodeId push(const char* op, std::vector<NodeId> inputs, Tensor value, bool requires_grad,
              std::function<void(Tape&, NodeId)> backward) {
    if (check_finite_ && !value.all_finite()) {
      throw Error(std::string(op) + " produced a non-finite value");
    }
    Record r;
    r.op = op;
    r.inputs = std::move(inputs);
    r.value = std::move(value);
    r.requires_grad = requires_grad;
    if (requires_grad) r.backward = std::move(backward);
    records_.push_back(std::move(r));
    return static_cast<NodeId>(records_.size() - 1);
  }

  std::vector<Record> records_;
  bool check_finite_ = false;
};

}  // namespace gaitref
