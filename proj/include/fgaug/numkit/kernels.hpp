#pragma once

// Raw convolution kernels shared by the graph ops. All three routines
// evaluate parts of the bilinear form
//   B(x, y, k) = sum y[n,o,i,j] * k[o,c,u,v] * x[n,c,i*s+u-p, j*s+v-p]
// so conv2d is dB/dy, its input gradient is dB/dx and its kernel gradient
// is dB/dk. Transposed convolution reuses the same three routines with the
// roles of x and y swapped.

#include "fgaug/numkit/tensor.hpp"

namespace fgaug::numkit::kernels {

std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad);
std::size_t deconv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad);

// y += conv(x, k). y must already have the conv output shape.
void conv_forward(const Tensor& x, const Tensor& k, std::size_t stride, std::size_t pad, Tensor& y);
// gx += adjoint of conv applied to gy.
void conv_backward_input(const std::vector<double>& gy, const Shape& y_shape, const Tensor& k,
                         std::size_t stride, std::size_t pad, std::vector<double>& gx,
                         const Shape& x_shape);
// gk += dB/dk for the given x and gy.
void conv_backward_kernel(const std::vector<double>& x, const Shape& x_shape,
                          const std::vector<double>& gy, const Shape& y_shape, std::size_t stride,
                          std::size_t pad, std::vector<double>& gk, const Shape& k_shape);

}  // namespace fgaug::numkit::kernels
