#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fgaug/numkit/tensor.hpp"

namespace fgaug::numkit {

class Graph;

// Handle to a node of a Graph. Cheap to copy; only valid while its graph
// is alive.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const;
  std::size_t numel() const;
};

enum class OpKind {
  Input,
  Param,
  Conv2d,
  Deconv2d,
  Add,
  Sub,
  Mul,
  AddBias,
  Relu,
  Sigmoid,
  LeakyRelu,
  Log,
  Clamp,
  Scale,
  Sum,
  Mean,
  L2Norm,
  ConcatChannels,
  GlobalAvgPool,
  CenterChannels,
  StraightThrough,
  AnchorRows,
  ConcatRows,
  Custom,
};

const char* op_name(OpKind kind);

struct Node;
using BackwardFn = std::function<void(Graph& graph, const Node& self)>;

struct Node {
  OpKind kind = OpKind::Input;
  std::vector<std::size_t> inputs;
  Tensor value;
  std::vector<double> grad;
  bool needs_grad = false;
  Tensor* param = nullptr;  // set for Param leaves
  BackwardFn backward;
};

// Tape of operations in creation order. Inputs always precede the node that
// consumes them, so a reverse sweep over the tape is a valid topological
// order for the backward pass.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Constant leaf; never receives gradient.
  Var input(Tensor value);
  // Leaf bound to a parameter. backward() adds d(loss)/d(param) into
  // param.grad, allocating it if needed.
  Var param(Tensor& param);

  // Generic extension point for composite ops with a hand-written backward.
  Var custom(std::span<const Var> inputs, Tensor value, BackwardFn backward);

  // Reverse sweep from a scalar loss. Every bound parameter gets a gradient
  // buffer, zero if it did not participate.
  void backward(Var loss);

  const Node& node(std::size_t id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  std::vector<OpKind> op_trace() const;

  // Used by backward closures.
  void accumulate(std::size_t id, std::span<const double> g);
  std::vector<double>& grad_buffer(std::size_t id);
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  Var push(OpKind kind, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward);

 private:
  std::deque<Node> nodes_;  // deque keeps node references stable across pushes
};

// Convolution with cross-correlation convention. kernel: [K, C, kh, kw].
Var conv2d(Var input, Var kernel, std::size_t stride, std::size_t pad);
// Transposed convolution; kernel: [Cin, Cout, kh, kw]. Adjoint of conv2d.
Var deconv2d(Var input, Var kernel, std::size_t stride, std::size_t pad);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// x: [N, C, ...], bias: [C].
Var add_bias(Var x, Var bias);

Var relu(Var x);
Var sigmoid(Var x);
Var leaky_relu(Var x, double slope = 0.2);
Var log(Var x);
// Gradient is zero where the input was clamped.
Var clamp(Var x, double lo, double hi);
Var scale(Var x, double factor);

Var sum(Var x);
Var mean(Var x);
// Euclidean norm of all elements; subgradient 0 at the origin.
Var l2_norm(Var x);

Var concat_channels(Var a, Var b);
// [N, C, H, W] -> [N, C, 1, 1]
Var global_avg_pool(Var x);
// Subtracts each channel's spatial mean.
Var center_channels(Var x);
// Forward: 1 where x >= threshold else 0. Backward: identity.
Var straight_through_binarize(Var x, double threshold);

// Head output [1, A*D, R, R] -> [R*R*A, D], row index (y*R + x)*A + a.
Var anchor_rows(Var x, std::size_t row_width);
Var concat_rows(std::span<const Var> parts);

}  // namespace fgaug::numkit
