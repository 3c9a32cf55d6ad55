#include "axg/tensor.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "axg/errors.h"

namespace axg {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape s) : shape(std::move(s)), data(shape_numel(shape), 0.0f) {}

Tensor::Tensor(Shape s, std::vector<float> values) : shape(std::move(s)), data(std::move(values)) {
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("shape " + shape_str(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  }
}

float Tensor::item() const {
  if (data.size() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape));
  return data[0];
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Conv1d: return "conv1d";
    case Op::Conv1dTranspose: return "conv1d_transpose";
    case Op::Tanh: return "tanh";
    case Op::Elu: return "elu";
    case Op::Relu: return "relu";
    case Op::Scale: return "scale";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Square: return "square";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::MeanRows: return "mean_rows";
    case Op::AddBias: return "add_bias";
    case Op::Transpose: return "transpose";
    case Op::Reshape: return "reshape";
    case Op::PadTime: return "pad_time";
    case Op::SliceTime: return "slice_time";
    case Op::SoftmaxCrossEntropy: return "softmax_cross_entropy";
    case Op::Pick: return "pick";
  }
  return "unknown";
}

const Tensor& Var::value() const { return graph_->value(id_); }

const std::vector<float>& Var::grad() const {
  const auto& g = graph_->node(id_).value.grad;
  if (!g) throw ContractError("no gradient recorded for node " + std::to_string(id_));
  return *g;
}

// ---------------------------------------------------------------------------
// Graph

Var Graph::leaf(Tensor value, bool requires_grad) {
  value.requires_grad = requires_grad;
  value.grad.reset();
  nodes_.push_back(Node{Op::Leaf, {}, std::move(value), nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Op op, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward) {
  value.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                    [&](std::size_t i) { return nodes_[i].value.requires_grad; });
  value.grad.reset();
  if (!value.requires_grad) backward = nullptr;
  nodes_.push_back(Node{op, std::move(inputs), std::move(value), std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

std::vector<float>* Graph::grad_sink(std::size_t id) {
  auto& v = nodes_[id].value;
  if (!v.requires_grad) return nullptr;
  if (!v.grad) v.grad.emplace(v.data.size(), 0.0f);
  return &*v.grad;
}

std::vector<std::size_t> Graph::parameter_ids() const {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op == Op::Leaf && nodes_[i].value.requires_grad) ids.push_back(i);
  }
  return ids;
}

void Graph::backward(Var loss) {
  if (&loss.graph() != this) throw ContractError("loss belongs to a different graph");
  const auto& lv = nodes_[loss.id()].value;
  if (lv.numel() != 1) throw ContractError("backward needs a scalar loss, got " + shape_str(lv.shape));
  for (auto& n : nodes_) n.value.grad.reset();
  backward_order_.clear();
  if (!lv.requires_grad) {
    for (auto id : parameter_ids()) grad_sink(id);
    return;
  }
  grad_sink(loss.id())->assign(1, 1.0f);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.value.grad || !n.backward) continue;
    backward_order_.push_back(i);
    n.backward(*this, i);
  }
  for (auto id : parameter_ids()) grad_sink(id);
}

// ---------------------------------------------------------------------------
// Kernels

namespace kernels {

std::size_t conv_output_length(std::size_t n, std::size_t k, std::size_t stride) {
  if (stride == 0) throw DimensionError("stride must be positive");
  if (n < k) {
    throw DimensionError("conv input length " + std::to_string(n) + " shorter than kernel " +
                         std::to_string(k));
  }
  return (n - k) / stride + 1;
}

namespace {

// Splits a length-n row into `stride` contiguous phases: phase p holds x[p], x[p+s], ...
struct Polyphase {
  std::vector<float> buf;
  std::vector<std::size_t> offset;

  Polyphase(std::size_t n, std::size_t stride) : offset(stride + 1, 0) {
    for (std::size_t p = 0; p < stride; ++p) {
      offset[p + 1] = offset[p] + (p < n ? (n - p + stride - 1) / stride : 0);
    }
    buf.assign(offset[stride], 0.0f);
  }
  float* phase(std::size_t p) { return buf.data() + offset[p]; }

  void split(const float* x, std::size_t n, std::size_t stride) {
    for (std::size_t p = 0; p < stride; ++p) {
      float* dst = phase(p);
      for (std::size_t i = p, j = 0; i < n; i += stride, ++j) dst[j] = x[i];
    }
  }
  void merge_add(float* x, std::size_t n, std::size_t stride) {
    for (std::size_t p = 0; p < stride; ++p) {
      const float* src = phase(p);
      for (std::size_t i = p, j = 0; i < n; i += stride, ++j) x[i] += src[j];
    }
  }
};

}  // namespace

void conv_forward(std::span<const float> x, std::size_t cin, std::size_t n, std::span<const float> w,
                  std::size_t cout, std::size_t k, std::size_t stride, std::span<float> y) {
  const std::size_t nout = conv_output_length(n, k, stride);
  Polyphase ph(n, stride);
  for (std::size_t ci = 0; ci < cin; ++ci) {
    ph.split(x.data() + ci * n, n, stride);
    for (std::size_t co = 0; co < cout; ++co) {
      float* yr = y.data() + co * nout;
      const float* wr = w.data() + (co * cin + ci) * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const float wv = wr[kk];
        const float* xs = ph.phase(kk % stride) + kk / stride;
        for (std::size_t j = 0; j < nout; ++j) yr[j] += wv * xs[j];
      }
    }
  }
}

void conv_backward_input(std::span<const float> gy, std::size_t cout, std::size_t nout,
                         std::span<const float> w, std::size_t cin, std::size_t k,
                         std::size_t stride, std::span<float> gx, std::size_t n) {
  Polyphase ph(n, stride);
  for (std::size_t ci = 0; ci < cin; ++ci) {
    std::fill(ph.buf.begin(), ph.buf.end(), 0.0f);
    for (std::size_t co = 0; co < cout; ++co) {
      const float* gr = gy.data() + co * nout;
      const float* wr = w.data() + (co * cin + ci) * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const float wv = wr[kk];
        float* gs = ph.phase(kk % stride) + kk / stride;
        for (std::size_t j = 0; j < nout; ++j) gs[j] += wv * gr[j];
      }
    }
    ph.merge_add(gx.data() + ci * n, n, stride);
  }
}

void conv_backward_weight(std::span<const float> gy, std::size_t cout, std::size_t nout,
                          std::span<const float> x, std::size_t cin, std::size_t n,
                          std::size_t k, std::size_t stride, std::span<float> gw) {
  std::vector<float> acc(k);
  for (std::size_t co = 0; co < cout; ++co) {
    const float* gr = gy.data() + co * nout;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      std::fill(acc.begin(), acc.end(), 0.0f);
      const float* xr = x.data() + ci * n;
      for (std::size_t j = 0; j < nout; ++j) {
        const float g = gr[j];
        const float* xs = xr + j * stride;
        for (std::size_t kk = 0; kk < k; ++kk) acc[kk] += g * xs[kk];
      }
      float* gwr = gw.data() + (co * cin + ci) * k;
      for (std::size_t kk = 0; kk < k; ++kk) gwr[kk] += acc[kk];
    }
  }
}

}  // namespace kernels

// ---------------------------------------------------------------------------
// Ops

namespace {

Graph& same_graph(Var a, Var b) {
  if (&a.graph() != &b.graph()) throw ContractError("operands belong to different graphs");
  return a.graph();
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(t.shape));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape != b.shape) {
    throw DimensionError(std::string(what) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                         shape_str(b.shape));
  }
}

template <typename Fwd, typename Deriv>
Var elementwise(Var x, Op op, Fwd fwd, Deriv deriv) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape);
  for (std::size_t i = 0; i < xv.numel(); ++i) out.data[i] = fwd(xv.data[i]);
  const std::size_t xid = x.id();
  return x.graph().record(op, {xid}, std::move(out), [xid, deriv](Graph& g, std::size_t self) {
    auto* gx = g.grad_sink(xid);
    if (!gx) return;
    const auto& gy = g.upstream(self);
    const auto& xd = g.value(xid).data;
    const auto& yd = g.value(self).data;
    for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += gy[i] * deriv(xd[i], yd[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank(av, 2, "matmul lhs");
  require_rank(bv, 2, "matmul rhs");
  const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  if (bv.dim(0) != k) {
    throw DimensionError("matmul inner dimensions disagree: " + shape_str(av.shape) + " x " +
                         shape_str(bv.shape));
  }
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    float* orow = out.data.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const float s = av.data[i * k + p];
      const float* brow = bv.data.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += s * brow[j];
    }
  }
  const std::size_t aid = a.id(), bid = b.id();
  return g.record(Op::MatMul, {aid, bid}, std::move(out), [aid, bid, m, k, n](Graph& gr, std::size_t self) {
    const auto& gy = gr.upstream(self);
    if (auto* ga = gr.grad_sink(aid)) {
      const auto& bd = gr.value(bid).data;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          float acc = 0.0f;
          for (std::size_t j = 0; j < n; ++j) acc += gy[i * n + j] * bd[p * n + j];
          (*ga)[i * k + p] += acc;
        }
      }
    }
    if (auto* gb = gr.grad_sink(bid)) {
      const auto& ad = gr.value(aid).data;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const float s = ad[i * k + p];
          for (std::size_t j = 0; j < n; ++j) (*gb)[p * n + j] += s * gy[i * n + j];
        }
      }
    }
  });
}

namespace {

void add_channel_bias(Tensor& out, const Tensor& bias) {
  const std::size_t c = out.dim(0), n = out.dim(1);
  if (bias.numel() != c) {
    throw DimensionError("bias of " + std::to_string(bias.numel()) + " values for " +
                         std::to_string(c) + " channels");
  }
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.data[i * n + j] += bias.data[i];
  }
}

void accumulate_channel_bias_grad(std::vector<float>& gb, const std::vector<float>& gy, std::size_t c,
                                  std::size_t n) {
  for (std::size_t i = 0; i < c; ++i) {
    float acc = 0.0f;
    for (std::size_t j = 0; j < n; ++j) acc += gy[i * n + j];
    gb[i] += acc;
  }
}

Var conv1d_impl(Var input, Var kernels, const Var* bias, std::size_t stride) {
  Graph& g = same_graph(input, kernels);
  const Tensor& xv = input.value();
  const Tensor& wv = kernels.value();
  require_rank(xv, 2, "conv1d input");
  require_rank(wv, 3, "conv1d kernels");
  const std::size_t cin = xv.dim(0), n = xv.dim(1);
  const std::size_t cout = wv.dim(0), k = wv.dim(2);
  if (wv.dim(1) != cin) {
    throw DimensionError("conv1d: kernels " + shape_str(wv.shape) + " do not match input " +
                         shape_str(xv.shape));
  }
  const std::size_t nout = kernels::conv_output_length(n, k, stride);
  Tensor out({cout, nout});
  kernels::conv_forward(xv.data, cin, n, wv.data, cout, k, stride, out.data);
  std::vector<std::size_t> inputs{input.id(), kernels.id()};
  if (bias) {
    same_graph(input, *bias);
    add_channel_bias(out, bias->value());
    inputs.push_back(bias->id());
  }
  return g.record(Op::Conv1d, inputs, std::move(out),
                  [inputs, cin, n, cout, nout, k, stride](Graph& gr, std::size_t self) {
                    const auto& gy = gr.upstream(self);
                    if (auto* gx = gr.grad_sink(inputs[0])) {
                      kernels::conv_backward_input(gy, cout, nout, gr.value(inputs[1]).data, cin, k,
                                                   stride, *gx, n);
                    }
                    if (auto* gw = gr.grad_sink(inputs[1])) {
                      kernels::conv_backward_weight(gy, cout, nout, gr.value(inputs[0]).data, cin, n,
                                                    k, stride, *gw);
                    }
                    if (inputs.size() > 2) {
                      if (auto* gb = gr.grad_sink(inputs[2])) accumulate_channel_bias_grad(*gb, gy, cout, nout);
                    }
                  });
}

Var conv1d_transpose_impl(Var input, Var kernels, const Var* bias, std::size_t stride) {
  Graph& g = same_graph(input, kernels);
  const Tensor& xv = input.value();
  const Tensor& wv = kernels.value();
  require_rank(xv, 2, "conv1d_transpose input");
  require_rank(wv, 3, "conv1d_transpose kernels");
  if (stride == 0) throw DimensionError("stride must be positive");
  const std::size_t cin = xv.dim(0), t = xv.dim(1);
  const std::size_t cout = wv.dim(1), k = wv.dim(2);
  if (wv.dim(0) != cin) {
    throw DimensionError("conv1d_transpose: kernels " + shape_str(wv.shape) + " do not match input " +
                         shape_str(xv.shape));
  }
  const std::size_t n = (t - 1) * stride + k;
  Tensor out({cout, n});
  // Transposed conv is the input-adjoint of a conv whose [Cout x Cin x K] kernels are ours.
  kernels::conv_backward_input(xv.data, cin, t, wv.data, cout, k, stride, out.data, n);
  std::vector<std::size_t> inputs{input.id(), kernels.id()};
  if (bias) {
    same_graph(input, *bias);
    add_channel_bias(out, bias->value());
    inputs.push_back(bias->id());
  }
  return g.record(Op::Conv1dTranspose, inputs, std::move(out),
                  [inputs, cin, t, cout, n, k, stride](Graph& gr, std::size_t self) {
                    const auto& gy = gr.upstream(self);
                    if (auto* gx = gr.grad_sink(inputs[0])) {
                      kernels::conv_forward(gy, cout, n, gr.value(inputs[1]).data, cin, k, stride, *gx);
                    }
                    if (auto* gw = gr.grad_sink(inputs[1])) {
                      kernels::conv_backward_weight(gr.value(inputs[0]).data, cin, t, gy, cout, n, k,
                                                    stride, *gw);
                    }
                    if (inputs.size() > 2) {
                      if (auto* gb = gr.grad_sink(inputs[2])) accumulate_channel_bias_grad(*gb, gy, cout, n);
                    }
                  });
}

}  // namespace

Var conv1d(Var input, Var kernels, std::size_t stride) { return conv1d_impl(input, kernels, nullptr, stride); }
Var conv1d(Var input, Var kernels, Var bias, std::size_t stride) {
  return conv1d_impl(input, kernels, &bias, stride);
}
Var conv1d_transpose(Var input, Var kernels, std::size_t stride) {
  return conv1d_transpose_impl(input, kernels, nullptr, stride);
}
Var conv1d_transpose(Var input, Var kernels, Var bias, std::size_t stride) {
  return conv1d_transpose_impl(input, kernels, &bias, stride);
}

Var tanh(Var x) {
  return elementwise(
      x, Op::Tanh, [](float v) { return std::tanh(v); }, [](float, float y) { return 1.0f - y * y; });
}

Var elu(Var x) {
  return elementwise(
      x, Op::Elu, [](float v) { return v > 0.0f ? v : std::expm1(v); },
      [](float v, float y) { return v > 0.0f ? 1.0f : y + 1.0f; });
}

Var relu(Var x) {
  return elementwise(
      x, Op::Relu, [](float v) { return v > 0.0f ? v : 0.0f; },
      [](float v, float) { return v > 0.0f ? 1.0f : 0.0f; });
}

Var scale(Var x, float c) {
  return elementwise(
      x, Op::Scale, [c](float v) { return c * v; }, [c](float, float) { return c; });
}

Var square(Var x) {
  return elementwise(
      x, Op::Square, [](float v) { return v * v; }, [](float v, float) { return 2.0f * v; });
}

namespace {

template <typename Fwd, typename DA, typename DB>
Var binary(Var a, Var b, Op op, const char* what, Fwd fwd, DA da, DB db) {
  Graph& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), what);
  const auto& ad = a.value().data;
  const auto& bd = b.value().data;
  Tensor out(a.value().shape);
  for (std::size_t i = 0; i < ad.size(); ++i) out.data[i] = fwd(ad[i], bd[i]);
  const std::size_t aid = a.id(), bid = b.id();
  return g.record(op, {aid, bid}, std::move(out), [aid, bid, da, db](Graph& gr, std::size_t self) {
    const auto& gy = gr.upstream(self);
    const auto& av = gr.value(aid).data;
    const auto& bv = gr.value(bid).data;
    if (auto* ga = gr.grad_sink(aid)) {
      for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += gy[i] * da(av[i], bv[i]);
    }
    if (auto* gb = gr.grad_sink(bid)) {
      for (std::size_t i = 0; i < gy.size(); ++i) (*gb)[i] += gy[i] * db(av[i], bv[i]);
    }
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary(
      a, b, Op::Add, "add", [](float x, float y) { return x + y; }, [](float, float) { return 1.0f; },
      [](float, float) { return 1.0f; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, Op::Sub, "sub", [](float x, float y) { return x - y; }, [](float, float) { return 1.0f; },
      [](float, float) { return -1.0f; });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, Op::Mul, "mul", [](float x, float y) { return x * y; }, [](float, float y) { return y; },
      [](float x, float) { return x; });
}

Var sum(Var x) {
  double acc = 0.0;
  for (float v : x.value().data) acc += v;
  const std::size_t xid = x.id();
  return x.graph().record(Op::Sum, {xid}, Tensor::scalar(static_cast<float>(acc)),
                          [xid](Graph& g, std::size_t self) {
                            if (auto* gx = g.grad_sink(xid)) {
                              const float gy = g.upstream(self)[0];
                              for (auto& v : *gx) v += gy;
                            }
                          });
}

Var mean(Var x) {
  double acc = 0.0;
  for (float v : x.value().data) acc += v;
  const std::size_t count = x.value().numel();
  const std::size_t xid = x.id();
  return x.graph().record(Op::Mean, {xid}, Tensor::scalar(static_cast<float>(acc / count)),
                          [xid, count](Graph& g, std::size_t self) {
                            if (auto* gx = g.grad_sink(xid)) {
                              const float gy = g.upstream(self)[0] / static_cast<float>(count);
                              for (auto& v : *gx) v += gy;
                            }
                          });
}

Var mean_rows(Var x) {
  const Tensor& xv = x.value();
  require_rank(xv, 2, "mean_rows");
  const std::size_t m = xv.dim(0), n = xv.dim(1);
  std::vector<double> acc(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) acc[j] += xv.data[i * n + j];
  }
  Tensor out({1, n});
  for (std::size_t j = 0; j < n; ++j) out.data[j] = static_cast<float>(acc[j] / static_cast<double>(m));
  const std::size_t xid = x.id();
  return x.graph().record(Op::MeanRows, {xid}, std::move(out), [xid, m, n](Graph& g, std::size_t self) {
    if (auto* gx = g.grad_sink(xid)) {
      const auto& gy = g.upstream(self);
      const float inv = 1.0f / static_cast<float>(m);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*gx)[i * n + j] += gy[j] * inv;
      }
    }
  });
}

Var add_bias(Var x, Var bias) {
  Graph& g = same_graph(x, bias);
  const Tensor& xv = x.value();
  require_rank(xv, 2, "add_bias");
  const std::size_t m = xv.dim(0), n = xv.dim(1);
  if (bias.value().numel() != n) {
    throw DimensionError("add_bias: bias " + shape_str(bias.value().shape) + " for rows of " +
                         std::to_string(n));
  }
  Tensor out = Tensor(xv.shape, xv.data);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.data[i * n + j] += bias.value().data[j];
  }
  const std::size_t xid = x.id(), bid = bias.id();
  return g.record(Op::AddBias, {xid, bid}, std::move(out), [xid, bid, m, n](Graph& gr, std::size_t self) {
    const auto& gy = gr.upstream(self);
    if (auto* gx = gr.grad_sink(xid)) {
      for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += gy[i];
    }
    if (auto* gb = gr.grad_sink(bid)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*gb)[j] += gy[i * n + j];
      }
    }
  });
}

Var transpose(Var x) {
  const Tensor& xv = x.value();
  require_rank(xv, 2, "transpose");
  const std::size_t m = xv.dim(0), n = xv.dim(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.data[j * m + i] = xv.data[i * n + j];
  }
  const std::size_t xid = x.id();
  return x.graph().record(Op::Transpose, {xid}, std::move(out), [xid, m, n](Graph& g, std::size_t self) {
    if (auto* gx = g.grad_sink(xid)) {
      const auto& gy = g.upstream(self);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*gx)[i * n + j] += gy[j * m + i];
      }
    }
  });
}

Var reshape(Var x, Shape shape) {
  const Tensor& xv = x.value();
  if (shape_numel(shape) != xv.numel()) {
    throw DimensionError("reshape " + shape_str(xv.shape) + " to " + shape_str(shape));
  }
  Tensor out(std::move(shape), xv.data);
  const std::size_t xid = x.id();
  return x.graph().record(Op::Reshape, {xid}, std::move(out), [xid](Graph& g, std::size_t self) {
    if (auto* gx = g.grad_sink(xid)) {
      const auto& gy = g.upstream(self);
      for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += gy[i];
    }
  });
}

Var pad_time(Var x, std::size_t left, std::size_t right) {
  const Tensor& xv = x.value();
  require_rank(xv, 2, "pad_time");
  const std::size_t c = xv.dim(0), n = xv.dim(1), m = n + left + right;
  Tensor out({c, m});
  for (std::size_t i = 0; i < c; ++i) {
    std::copy_n(xv.data.begin() + i * n, n, out.data.begin() + i * m + left);
  }
  const std::size_t xid = x.id();
  return x.graph().record(Op::PadTime, {xid}, std::move(out), [xid, c, n, m, left](Graph& g, std::size_t self) {
    if (auto* gx = g.grad_sink(xid)) {
      const auto& gy = g.upstream(self);
      for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*gx)[i * n + j] += gy[i * m + left + j];
      }
    }
  });
}

Var slice_time(Var x, std::size_t begin, std::size_t length) {
  const Tensor& xv = x.value();
  require_rank(xv, 2, "slice_time");
  const std::size_t c = xv.dim(0), n = xv.dim(1);
  if (length == 0 || begin + length > n) {
    throw DimensionError("slice_time [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
                         ") outside length " + std::to_string(n));
  }
  Tensor out({c, length});
  for (std::size_t i = 0; i < c; ++i) {
    std::copy_n(xv.data.begin() + i * n + begin, length, out.data.begin() + i * length);
  }
  const std::size_t xid = x.id();
  return x.graph().record(Op::SliceTime, {xid}, std::move(out),
                          [xid, c, n, begin, length](Graph& g, std::size_t self) {
                            if (auto* gx = g.grad_sink(xid)) {
                              const auto& gy = g.upstream(self);
                              for (std::size_t i = 0; i < c; ++i) {
                                for (std::size_t j = 0; j < length; ++j) {
                                  (*gx)[i * n + begin + j] += gy[i * length + j];
                                }
                              }
                            }
                          });
}

Var softmax_cross_entropy(Var logits, std::size_t label) {
  const auto& ld = logits.value().data;
  const std::size_t c = ld.size();
  if (label >= c) {
    throw IndexError("label " + std::to_string(label) + " out of range for " + std::to_string(c) +
                     " classes");
  }
  const double mx = *std::max_element(ld.begin(), ld.end());
  double z = 0.0;
  for (float v : ld) z += std::exp(static_cast<double>(v) - mx);
  const double lse = mx + std::log(z);
  const auto loss = static_cast<float>(lse - ld[label]);
  const std::size_t lid = logits.id();
  return logits.graph().record(Op::SoftmaxCrossEntropy, {lid}, Tensor::scalar(loss),
                               [lid, label, lse](Graph& g, std::size_t self) {
                                 if (auto* gl = g.grad_sink(lid)) {
                                   const float gy = g.upstream(self)[0];
                                   const auto& l = g.value(lid).data;
                                   for (std::size_t i = 0; i < l.size(); ++i) {
                                     double p = std::exp(static_cast<double>(l[i]) - lse);
                                     if (i == label) p -= 1.0;
                                     (*gl)[i] += gy * static_cast<float>(p);
                                   }
                                 }
                               });
}

Var pick(Var x, std::size_t flat_index) {
  const auto& xd = x.value().data;
  if (flat_index >= xd.size()) {
    throw IndexError("pick index " + std::to_string(flat_index) + " out of range for " +
                     shape_str(x.value().shape));
  }
  const std::size_t xid = x.id();
  return x.graph().record(Op::Pick, {xid}, Tensor::scalar(xd[flat_index]),
                          [xid, flat_index](Graph& g, std::size_t self) {
                            if (auto* gx = g.grad_sink(xid)) (*gx)[flat_index] += g.upstream(self)[0];
                          });
}

}  // namespace axg
