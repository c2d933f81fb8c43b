#include "fgaug/numkit/layers.hpp"

#include <cmath>
#include <cstring>

namespace fgaug::numkit {

void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.data) v = rng.uniform(-bound, bound);
}

void init_he_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (double& v : t.data) v = rng.uniform(-bound, bound);
}

Conv2d::Conv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride_,
               std::size_t pad_)
    : weight({out, in, kernel, kernel}), bias({out}), stride(stride_), pad(pad_) {}

Var Conv2d::operator()(const Binding& b, Var x) {
  return add_bias(conv2d(x, b.bind(weight), stride, pad), b.bind(bias));
}

void Conv2d::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + "/weight", &weight});
  out.push_back({prefix + "/bias", &bias});
}

Deconv2d::Deconv2d(std::size_t in, std::size_t out, std::size_t kernel, std::size_t stride_,
                   std::size_t pad_)
    : weight({in, out, kernel, kernel}), bias({out}), stride(stride_), pad(pad_) {}

Var Deconv2d::operator()(const Binding& b, Var x) {
  return add_bias(deconv2d(x, b.bind(weight), stride, pad), b.bind(bias));
}

void Deconv2d::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + "/weight", &weight});
  out.push_back({prefix + "/bias", &bias});
}

void sgd_step(const std::vector<ParamRef>& params, double lr) {
  for (const auto& p : params) {
    Tensor& t = *p.tensor;
    if (t.grad.size() != t.data.size()) continue;
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] -= lr * t.grad[i];
  }
}

void zero_grads(const std::vector<ParamRef>& params) {
  for (const auto& p : params) p.tensor->zero_grad();
}

std::uint64_t checksum(const std::vector<ParamRef>& params) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](const void* bytes, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& p : params) {
    feed(p.name.data(), p.name.size());
    feed(p.tensor->data.data(), p.tensor->data.size() * sizeof(double));
  }
  return h;
}

}  // namespace fgaug::numkit
