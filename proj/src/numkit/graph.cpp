#include "fgaug/numkit/graph.hpp"

#include <algorithm>
#include <cmath>

#include "fgaug/errors.hpp"
#include "fgaug/numkit/kernels.hpp"

namespace fgaug::numkit {

const Tensor& Var::value() const { return graph->node(id).value; }
const Shape& Var::shape() const { return graph->node(id).value.shape; }
std::size_t Var::numel() const { return graph->node(id).value.numel(); }

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Input: return "input";
    case OpKind::Param: return "param";
    case OpKind::Conv2d: return "conv2d";
    case OpKind::Deconv2d: return "deconv2d";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::AddBias: return "add_bias";
    case OpKind::Relu: return "relu";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::LeakyRelu: return "leaky_relu";
    case OpKind::Log: return "log";
    case OpKind::Clamp: return "clamp";
    case OpKind::Scale: return "scale";
    case OpKind::Sum: return "sum";
    case OpKind::Mean: return "mean";
    case OpKind::L2Norm: return "l2_norm";
    case OpKind::ConcatChannels: return "concat_channels";
    case OpKind::GlobalAvgPool: return "global_avg_pool";
    case OpKind::CenterChannels: return "center_channels";
    case OpKind::StraightThrough: return "straight_through";
    case OpKind::AnchorRows: return "anchor_rows";
    case OpKind::ConcatRows: return "concat_rows";
    case OpKind::Custom: return "custom";
  }
  return "?";
}

Var Graph::input(Tensor value) {
  value.grad.clear();
  value.requires_grad = false;
  return push(OpKind::Input, {}, std::move(value), nullptr);
}

Var Graph::param(Tensor& p) {
  Tensor copy(p.shape, p.data);
  Var v = push(OpKind::Param, {}, std::move(copy), nullptr);
  nodes_[v.id].param = &p;
  nodes_[v.id].needs_grad = true;
  return v;
}

Var Graph::custom(std::span<const Var> inputs, Tensor value, BackwardFn backward) {
  std::vector<std::size_t> ids;
  for (const Var& v : inputs) {
    if (v.graph != this) throw ContractError("custom op: input belongs to another graph");
    ids.push_back(v.id);
  }
  return push(OpKind::Custom, std::move(ids), std::move(value), std::move(backward));
}

Var Graph::push(OpKind kind, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward) {
  Node n;
  n.kind = kind;
  n.needs_grad = std::any_of(inputs.begin(), inputs.end(),
                             [&](std::size_t i) { return nodes_[i].needs_grad; });
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

std::vector<double>& Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.value.numel(), 0.0);
  return n.grad;
}

void Graph::accumulate(std::size_t id, std::span<const double> g) {
  if (!nodes_[id].needs_grad) return;
  auto& buf = grad_buffer(id);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

void Graph::backward(Var loss) {
  if (loss.graph != this) throw ContractError("backward: loss belongs to another graph");
  if (nodes_[loss.id].value.numel() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " +
                        shape_str(nodes_[loss.id].value.shape));
  }
  for (auto& n : nodes_) n.grad.clear();
  if (nodes_[loss.id].needs_grad) grad_buffer(loss.id)[0] = 1.0;
  for (std::size_t id = nodes_.size(); id-- > 0;) {
    Node& n = nodes_[id];
    if (n.kind == OpKind::Param) {
      Tensor& p = *n.param;
      if (p.grad.size() != p.data.size()) p.grad.assign(p.data.size(), 0.0);
      if (!n.grad.empty()) {
        for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += n.grad[i];
      }
      continue;
    }
    if (!n.needs_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, n);
  }
}

std::vector<OpKind> Graph::op_trace() const {
  std::vector<OpKind> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.kind);
  return out;
}

namespace {

Graph& graph_of(Var a) {
  if (a.graph == nullptr) throw ContractError("variable is not attached to a graph");
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  if (a.graph == nullptr || a.graph != b.graph) {
    throw ContractError("variables belong to different graphs");
  }
  return *a.graph;
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

void require_rank(const char* op, Var a, std::size_t rank) {
  if (a.shape().size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(a.shape()));
  }
}

template <class F, class DF>
Var pointwise(OpKind kind, Var x, F f, DF df) {
  Graph& g = graph_of(x);
  const Tensor& in = x.value();
  Tensor out(in.shape);
  for (std::size_t i = 0; i < in.numel(); ++i) out.data[i] = f(in.data[i]);
  return g.push(kind, {x.id}, std::move(out), [df](Graph& gr, const Node& self) {
    const auto& xin = gr.node(self.inputs[0]).value.data;
    if (!gr.needs_grad(self.inputs[0])) return;
    auto& gx = gr.grad_buffer(self.inputs[0]);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += self.grad[i] * df(xin[i], self.value.data[i]);
    }
  });
}

}  // namespace

Var conv2d(Var input, Var kernel, std::size_t stride, std::size_t pad) {
  Graph& g = graph_of(input, kernel);
  require_rank("conv2d", input, 4);
  require_rank("conv2d", kernel, 4);
  const Shape& xs = input.shape();
  const Shape& ks = kernel.shape();
  if (xs[1] != ks[1]) {
    throw DimensionError("conv2d: input has " + std::to_string(xs[1]) +
                         " channels but kernel expects " + std::to_string(ks[1]));
  }
  const std::size_t ho = kernels::conv_out_size(xs[2], ks[2], stride, pad);
  const std::size_t wo = kernels::conv_out_size(xs[3], ks[3], stride, pad);
  Tensor out({xs[0], ks[0], ho, wo});
  kernels::conv_forward(input.value(), kernel.value(), stride, pad, out);
  return g.push(OpKind::Conv2d, {input.id, kernel.id}, std::move(out),
                [stride, pad](Graph& gr, const Node& self) {
                  const Node& x = gr.node(self.inputs[0]);
                  const Node& k = gr.node(self.inputs[1]);
                  if (gr.needs_grad(self.inputs[0])) {
                    kernels::conv_backward_input(self.grad, self.value.shape, k.value, stride, pad,
                                                 gr.grad_buffer(self.inputs[0]), x.value.shape);
                  }
                  if (gr.needs_grad(self.inputs[1])) {
                    kernels::conv_backward_kernel(x.value.data, x.value.shape, self.grad,
                                                  self.value.shape, stride, pad,
                                                  gr.grad_buffer(self.inputs[1]), k.value.shape);
                  }
                });
}

Var deconv2d(Var input, Var kernel, std::size_t stride, std::size_t pad) {
  Graph& g = graph_of(input, kernel);
  require_rank("deconv2d", input, 4);
  require_rank("deconv2d", kernel, 4);
  const Shape& us = input.shape();
  const Shape& ks = kernel.shape();
  if (us[1] != ks[0]) {
    throw DimensionError("deconv2d: input has " + std::to_string(us[1]) +
                         " channels but kernel expects " + std::to_string(ks[0]));
  }
  const std::size_t ho = kernels::deconv_out_size(us[2], ks[2], stride, pad);
  const std::size_t wo = kernels::deconv_out_size(us[3], ks[3], stride, pad);
  const Shape out_shape{us[0], ks[1], ho, wo};
  // The deconv output plays the conv-input role; check the round trip holds.
  if (kernels::conv_out_size(ho, ks[2], stride, pad) != us[2] ||
      kernels::conv_out_size(wo, ks[3], stride, pad) != us[3]) {
    throw DimensionError("deconv2d: inconsistent geometry");
  }
  Tensor out(out_shape);
  kernels::conv_backward_input(input.value().data, us, kernel.value(), stride, pad, out.data,
                               out_shape);
  return g.push(OpKind::Deconv2d, {input.id, kernel.id}, std::move(out),
                [stride, pad](Graph& gr, const Node& self) {
                  const Node& u = gr.node(self.inputs[0]);
                  const Node& k = gr.node(self.inputs[1]);
                  if (gr.needs_grad(self.inputs[0])) {
                    Tensor gout(self.value.shape, self.grad);
                    Tensor gu(u.value.shape);
                    kernels::conv_forward(gout, k.value, stride, pad, gu);
                    gr.accumulate(self.inputs[0], gu.data);
                  }
                  if (gr.needs_grad(self.inputs[1])) {
                    kernels::conv_backward_kernel(self.grad, self.value.shape, u.value.data,
                                                  u.value.shape, stride, pad,
                                                  gr.grad_buffer(self.inputs[1]), k.value.shape);
                  }
                });
}

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape("add", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = a.value().data[i] + b.value().data[i];
  return g.push(OpKind::Add, {a.id, b.id}, std::move(out), [](Graph& gr, const Node& self) {
    gr.accumulate(self.inputs[0], self.grad);
    gr.accumulate(self.inputs[1], self.grad);
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape("sub", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = a.value().data[i] - b.value().data[i];
  return g.push(OpKind::Sub, {a.id, b.id}, std::move(out), [](Graph& gr, const Node& self) {
    gr.accumulate(self.inputs[0], self.grad);
    if (gr.needs_grad(self.inputs[1])) {
      auto& gb = gr.grad_buffer(self.inputs[1]);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= self.grad[i];
    }
  });
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape("mul", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = a.value().data[i] * b.value().data[i];
  return g.push(OpKind::Mul, {a.id, b.id}, std::move(out), [](Graph& gr, const Node& self) {
    const auto& av = gr.node(self.inputs[0]).value.data;
    const auto& bv = gr.node(self.inputs[1]).value.data;
    if (gr.needs_grad(self.inputs[0])) {
      auto& ga = gr.grad_buffer(self.inputs[0]);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * bv[i];
    }
    if (gr.needs_grad(self.inputs[1])) {
      auto& gb = gr.grad_buffer(self.inputs[1]);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += self.grad[i] * av[i];
    }
  });
}

Var add_bias(Var x, Var bias) {
  Graph& g = graph_of(x, bias);
  const Shape& xs = x.shape();
  if (xs.size() < 2 || bias.shape().size() != 1 || bias.shape()[0] != xs[1]) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not match " +
                         shape_str(xs));
  }
  const std::size_t n = xs[0], c = xs[1];
  const std::size_t inner = x.numel() / (n * c);
  Tensor out(xs);
  const auto& xv = x.value().data;
  const auto& bv = bias.value().data;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t k = 0; k < inner; ++k) {
        const std::size_t idx = (i * c + ch) * inner + k;
        out.data[idx] = xv[idx] + bv[ch];
      }
  return g.push(OpKind::AddBias, {x.id, bias.id}, std::move(out),
                [n, c, inner](Graph& gr, const Node& self) {
                  gr.accumulate(self.inputs[0], self.grad);
                  if (!gr.needs_grad(self.inputs[1])) return;
                  auto& gb = gr.grad_buffer(self.inputs[1]);
                  for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t ch = 0; ch < c; ++ch) {
                      double s = 0.0;
                      const double* row = self.grad.data() + (i * c + ch) * inner;
                      for (std::size_t k = 0; k < inner; ++k) s += row[k];
                      gb[ch] += s;
                    }
                });
}

Var relu(Var x) {
  return pointwise(
      OpKind::Relu, x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var x) {
  return pointwise(
      OpKind::Sigmoid, x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double out) { return out * (1.0 - out); });
}

Var leaky_relu(Var x, double slope) {
  return pointwise(
      OpKind::LeakyRelu, x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double in, double) { return in > 0.0 ? 1.0 : slope; });
}

Var log(Var x) {
  for (double v : x.value().data) {
    if (!(v > 0.0)) throw ContractError("log: non-positive input");
  }
  return pointwise(
      OpKind::Log, x, [](double v) { return std::log(v); },
      [](double in, double) { return 1.0 / in; });
}

Var clamp(Var x, double lo, double hi) {
  return pointwise(
      OpKind::Clamp, x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double in, double) { return (in >= lo && in <= hi) ? 1.0 : 0.0; });
}

Var scale(Var x, double factor) {
  return pointwise(
      OpKind::Scale, x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Var sum(Var x) {
  Graph& g = graph_of(x);
  double s = 0.0;
  for (double v : x.value().data) s += v;
  return g.push(OpKind::Sum, {x.id}, Tensor::scalar(s), [](Graph& gr, const Node& self) {
    if (!gr.needs_grad(self.inputs[0])) return;
    auto& gx = gr.grad_buffer(self.inputs[0]);
    for (double& v : gx) v += self.grad[0];
  });
}

Var mean(Var x) {
  Graph& g = graph_of(x);
  const double n = static_cast<double>(x.numel());
  double s = 0.0;
  for (double v : x.value().data) s += v;
  return g.push(OpKind::Mean, {x.id}, Tensor::scalar(s / n), [n](Graph& gr, const Node& self) {
    if (!gr.needs_grad(self.inputs[0])) return;
    auto& gx = gr.grad_buffer(self.inputs[0]);
    for (double& v : gx) v += self.grad[0] / n;
  });
}

Var l2_norm(Var x) {
  Graph& g = graph_of(x);
  double s = 0.0;
  for (double v : x.value().data) s += v * v;
  const double norm = std::sqrt(s);
  return g.push(OpKind::L2Norm, {x.id}, Tensor::scalar(norm), [](Graph& gr, const Node& self) {
    if (!gr.needs_grad(self.inputs[0])) return;
    const double nrm = self.value.data[0];
    if (nrm == 0.0) return;
    const auto& xv = gr.node(self.inputs[0]).value.data;
    auto& gx = gr.grad_buffer(self.inputs[0]);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[0] * xv[i] / nrm;
  });
}

Var concat_channels(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_rank("concat_channels", a, 4);
  require_rank("concat_channels", b, 4);
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (as[0] != bs[0] || as[2] != bs[2] || as[3] != bs[3]) {
    throw DimensionError("concat_channels: " + shape_str(as) + " vs " + shape_str(bs));
  }
  const std::size_t n = as[0], plane = as[2] * as[3];
  const std::size_t ca = as[1], cb = bs[1];
  Tensor out({n, ca + cb, as[2], as[3]});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.value().data.begin() + i * ca * plane, ca * plane,
                out.data.begin() + i * (ca + cb) * plane);
    std::copy_n(b.value().data.begin() + i * cb * plane, cb * plane,
                out.data.begin() + (i * (ca + cb) + ca) * plane);
  }
  return g.push(OpKind::ConcatChannels, {a.id, b.id}, std::move(out),
                [n, ca, cb, plane](Graph& gr, const Node& self) {
                  if (gr.needs_grad(self.inputs[0])) {
                    auto& ga = gr.grad_buffer(self.inputs[0]);
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t k = 0; k < ca * plane; ++k)
                        ga[i * ca * plane + k] += self.grad[i * (ca + cb) * plane + k];
                  }
                  if (gr.needs_grad(self.inputs[1])) {
                    auto& gb = gr.grad_buffer(self.inputs[1]);
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t k = 0; k < cb * plane; ++k)
                        gb[i * cb * plane + k] += self.grad[(i * (ca + cb) + ca) * plane + k];
                  }
                });
}

Var global_avg_pool(Var x) {
  Graph& g = graph_of(x);
  require_rank("global_avg_pool", x, 4);
  const Shape& xs = x.shape();
  const std::size_t nc = xs[0] * xs[1], plane = xs[2] * xs[3];
  Tensor out({xs[0], xs[1], 1, 1});
  for (std::size_t i = 0; i < nc; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < plane; ++k) s += x.value().data[i * plane + k];
    out.data[i] = s / static_cast<double>(plane);
  }
  return g.push(OpKind::GlobalAvgPool, {x.id}, std::move(out),
                [nc, plane](Graph& gr, const Node& self) {
                  if (!gr.needs_grad(self.inputs[0])) return;
                  auto& gx = gr.grad_buffer(self.inputs[0]);
                  for (std::size_t i = 0; i < nc; ++i) {
                    const double v = self.grad[i] / static_cast<double>(plane);
                    for (std::size_t k = 0; k < plane; ++k) gx[i * plane + k] += v;
                  }
                });
}

Var center_channels(Var x) {
  Graph& g = graph_of(x);
  require_rank("center_channels", x, 4);
  const Shape& xs = x.shape();
  const std::size_t nc = xs[0] * xs[1], plane = xs[2] * xs[3];
  Tensor out(xs);
  for (std::size_t i = 0; i < nc; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < plane; ++k) s += x.value().data[i * plane + k];
    const double m = s / static_cast<double>(plane);
    for (std::size_t k = 0; k < plane; ++k) out.data[i * plane + k] = x.value().data[i * plane + k] - m;
  }
  return g.push(OpKind::CenterChannels, {x.id}, std::move(out),
                [nc, plane](Graph& gr, const Node& self) {
                  if (!gr.needs_grad(self.inputs[0])) return;
                  auto& gx = gr.grad_buffer(self.inputs[0]);
                  for (std::size_t i = 0; i < nc; ++i) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < plane; ++k) s += self.grad[i * plane + k];
                    const double m = s / static_cast<double>(plane);
                    for (std::size_t k = 0; k < plane; ++k) gx[i * plane + k] += self.grad[i * plane + k] - m;
                  }
                });
}

Var straight_through_binarize(Var x, double threshold) {
  Graph& g = graph_of(x);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) {
    out.data[i] = x.value().data[i] >= threshold ? 1.0 : 0.0;
  }
  return g.push(OpKind::StraightThrough, {x.id}, std::move(out),
                [](Graph& gr, const Node& self) { gr.accumulate(self.inputs[0], self.grad); });
}

Var anchor_rows(Var x, std::size_t row_width) {
  Graph& g = graph_of(x);
  require_rank("anchor_rows", x, 4);
  const Shape& xs = x.shape();
  if (xs[0] != 1 || row_width == 0 || xs[1] % row_width != 0) {
    throw DimensionError("anchor_rows: cannot split " + shape_str(xs) + " into rows of " +
                         std::to_string(row_width));
  }
  const std::size_t per_cell = xs[1] / row_width;
  const std::size_t h = xs[2], w = xs[3], plane = h * w;
  Tensor out({plane * per_cell, row_width});
  // out[(cell*A + a), d] = x[0, a*D + d, cell]
  for (std::size_t cell = 0; cell < plane; ++cell)
    for (std::size_t a = 0; a < per_cell; ++a)
      for (std::size_t d = 0; d < row_width; ++d)
        out.data[(cell * per_cell + a) * row_width + d] =
            x.value().data[(a * row_width + d) * plane + cell];
  return g.push(OpKind::AnchorRows, {x.id}, std::move(out),
                [per_cell, row_width, plane](Graph& gr, const Node& self) {
                  if (!gr.needs_grad(self.inputs[0])) return;
                  auto& gx = gr.grad_buffer(self.inputs[0]);
                  for (std::size_t cell = 0; cell < plane; ++cell)
                    for (std::size_t a = 0; a < per_cell; ++a)
                      for (std::size_t d = 0; d < row_width; ++d)
                        gx[(a * row_width + d) * plane + cell] +=
                            self.grad[(cell * per_cell + a) * row_width + d];
                });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  Graph& g = graph_of(parts[0]);
  const std::size_t width = parts[0].shape().at(1);
  std::size_t rows = 0;
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    require_rank("concat_rows", p, 2);
    if (p.graph != &g) throw ContractError("concat_rows: mixed graphs");
    if (p.shape()[1] != width) throw DimensionError("concat_rows: row widths differ");
    rows += p.shape()[0];
    ids.push_back(p.id);
  }
  Tensor out({rows, width});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data.begin(), p.value().data.end(), out.data.begin() + offset);
    offset += p.numel();
  }
  return g.push(OpKind::ConcatRows, std::move(ids), std::move(out),
                [](Graph& gr, const Node& self) {
                  std::size_t off = 0;
                  for (std::size_t id : self.inputs) {
                    const std::size_t n = gr.node(id).value.numel();
                    gr.accumulate(id, std::span<const double>(self.grad.data() + off, n));
                    off += n;
                  }
                });
}

}  // namespace fgaug::numkit
