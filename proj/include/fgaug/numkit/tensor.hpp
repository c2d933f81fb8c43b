#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fgaug::numkit {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major 64-bit tensor. `grad` is empty until a backward pass or an
// explicit zero_grad() allocates it.
struct Tensor {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0);
  Tensor(Shape s, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  std::size_t numel() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  void zero_grad() { grad.assign(data.size(), 0.0); }
  bool has_grad() const { return !grad.empty(); }

  // Element access for rank-4 NCHW tensors.
  double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
    return data[((n * shape[1] + c) * shape[2] + y) * shape[3] + x];
  }
  double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data[((n * shape[1] + c) * shape[2] + y) * shape[3] + x];
  }
};

bool all_finite(const Tensor& t);
double dot(const Tensor& a, const Tensor& b);

}  // namespace fgaug::numkit
