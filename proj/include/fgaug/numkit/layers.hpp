#pragma once

#include <string>
#include <vector>

#include "fgaug/numkit/graph.hpp"
#include "fgaug/numkit/rng.hpp"
#include "fgaug/numkit/tensor.hpp"

namespace fgaug::numkit {

struct ParamRef {
  std::string name;
  Tensor* tensor;
};

// Decides how a model's parameters enter a graph: as trainable leaves or as
// frozen constants.
struct Binding {
  Graph* graph;
  bool trainable;

  Var bind(Tensor& t) const { return trainable ? graph->param(t) : graph->input(t); }
};

struct Conv2d {
  Tensor weight;  // [out, in, k, k]
  Tensor bias;    // [out]
  std::size_t stride = 1;
  std::size_t pad = 0;

  Conv2d() = default;
  Conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, std::size_t pad);

  Var operator()(const Binding& b, Var x);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

struct Deconv2d {
  Tensor weight;  // [in, out, k, k]
  Tensor bias;    // [out]
  std::size_t stride = 1;
  std::size_t pad = 0;

  Deconv2d() = default;
  Deconv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride, std::size_t pad);

  Var operator()(const Binding& b, Var x);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng);
// Uniform with variance 2 / fan_in, for layers followed by a ReLU.
void init_he_uniform(Tensor& t, std::size_t fan_in, Rng& rng);

void sgd_step(const std::vector<ParamRef>& params, double lr);
void zero_grads(const std::vector<ParamRef>& params);
// FNV-1a over the raw bytes of every parameter, in order.
std::uint64_t checksum(const std::vector<ParamRef>& params);

}  // namespace fgaug::numkit
