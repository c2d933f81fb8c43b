#include "fgaug/numkit/kernels.hpp"

#include <algorithm>

#include "fgaug/errors.hpp"

namespace fgaug::numkit::kernels {
namespace {

using Index = std::ptrdiff_t;

// Output positions j in [lo, hi) for which j*stride + offset lands in [0, extent).
struct Span1 {
  Index lo;
  Index hi;
};

Span1 valid_range(Index offset, Index stride, Index extent, Index out_extent) {
  Index lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  Index hi = extent - 1 - offset >= 0 ? (extent - 1 - offset) / stride + 1 : 0;
  hi = std::min(hi, out_extent);
  return {lo, std::max(lo, hi)};
}

struct ConvDims {
  Index n, c, h, w;   // input
  Index k, kh, kw;    // kernel
  Index ho, wo;       // output
  Index stride, pad;
};

ConvDims dims_of(const Shape& x, const Shape& k, const Shape& y, std::size_t stride,
                 std::size_t pad) {
  return {Index(x[0]), Index(x[1]), Index(x[2]), Index(x[3]), Index(k[0]), Index(k[2]),
          Index(k[3]),  Index(y[2]), Index(y[3]), Index(stride), Index(pad)};
}

}  // namespace

std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  if (stride == 0) throw DimensionError("conv2d: stride must be >= 1");
  if (k > in + 2 * pad) {
    throw DimensionError("conv2d: kernel " + std::to_string(k) + " larger than padded input " +
                         std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - k) / stride + 1;
}

std::size_t deconv_out_size(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  if (stride == 0) throw DimensionError("deconv2d: stride must be >= 1");
  const std::size_t full = (in - 1) * stride + k;
  if (full <= 2 * pad) throw DimensionError("deconv2d: padding consumes the whole output");
  return full - 2 * pad;
}

void conv_forward(const Tensor& x, const Tensor& k, std::size_t stride, std::size_t pad,
                  Tensor& y) {
  const ConvDims d = dims_of(x.shape, k.shape, y.shape, stride, pad);
  const double* xd = x.data.data();
  const double* kd = k.data.data();
  double* yd = y.data.data();
  for (Index n = 0; n < d.n; ++n) {
    for (Index o = 0; o < d.k; ++o) {
      double* yplane = yd + (n * d.k + o) * d.ho * d.wo;
      for (Index c = 0; c < d.c; ++c) {
        const double* xplane = xd + (n * d.c + c) * d.h * d.w;
        for (Index u = 0; u < d.kh; ++u) {
          const Span1 rows = valid_range(u - d.pad, d.stride, d.h, d.ho);
          for (Index v = 0; v < d.kw; ++v) {
            const double wv = kd[((o * d.c + c) * d.kh + u) * d.kw + v];
            const Span1 cols = valid_range(v - d.pad, d.stride, d.w, d.wo);
            for (Index i = rows.lo; i < rows.hi; ++i) {
              const double* xrow = xplane + (i * d.stride + u - d.pad) * d.w;
              double* yrow = yplane + i * d.wo;
              for (Index j = cols.lo; j < cols.hi; ++j) yrow[j] += wv * xrow[j * d.stride + v - d.pad];
            }
          }
        }
      }
    }
  }
}

void conv_backward_input(const std::vector<double>& gy, const Shape& y_shape, const Tensor& k,
                         std::size_t stride, std::size_t pad, std::vector<double>& gx,
                         const Shape& x_shape) {
  const ConvDims d = dims_of(x_shape, k.shape, y_shape, stride, pad);
  const double* kd = k.data.data();
  for (Index n = 0; n < d.n; ++n) {
    for (Index o = 0; o < d.k; ++o) {
      const double* gplane = gy.data() + (n * d.k + o) * d.ho * d.wo;
      for (Index c = 0; c < d.c; ++c) {
        double* xplane = gx.data() + (n * d.c + c) * d.h * d.w;
        for (Index u = 0; u < d.kh; ++u) {
          const Span1 rows = valid_range(u - d.pad, d.stride, d.h, d.ho);
          for (Index v = 0; v < d.kw; ++v) {
            const double wv = kd[((o * d.c + c) * d.kh + u) * d.kw + v];
            const Span1 cols = valid_range(v - d.pad, d.stride, d.w, d.wo);
            for (Index i = rows.lo; i < rows.hi; ++i) {
              double* xrow = xplane + (i * d.stride + u - d.pad) * d.w;
              const double* grow = gplane + i * d.wo;
              for (Index j = cols.lo; j < cols.hi; ++j) xrow[j * d.stride + v - d.pad] += wv * grow[j];
            }
          }
        }
      }
    }
  }
}

void conv_backward_kernel(const std::vector<double>& x, const Shape& x_shape,
                          const std::vector<double>& gy, const Shape& y_shape, std::size_t stride,
                          std::size_t pad, std::vector<double>& gk, const Shape& k_shape) {
  const ConvDims d = dims_of(x_shape, k_shape, y_shape, stride, pad);
  for (Index n = 0; n < d.n; ++n) {
    for (Index o = 0; o < d.k; ++o) {
      const double* gplane = gy.data() + (n * d.k + o) * d.ho * d.wo;
      for (Index c = 0; c < d.c; ++c) {
        const double* xplane = x.data() + (n * d.c + c) * d.h * d.w;
        for (Index u = 0; u < d.kh; ++u) {
          const Span1 rows = valid_range(u - d.pad, d.stride, d.h, d.ho);
          for (Index v = 0; v < d.kw; ++v) {
            const Span1 cols = valid_range(v - d.pad, d.stride, d.w, d.wo);
            double acc = 0.0;
            for (Index i = rows.lo; i < rows.hi; ++i) {
              const double* xrow = xplane + (i * d.stride + u - d.pad) * d.w;
              const double* grow = gplane + i * d.wo;
              for (Index j = cols.lo; j < cols.hi; ++j) acc += grow[j] * xrow[j * d.stride + v - d.pad];
            }
            gk[((o * d.c + c) * d.kh + u) * d.kw + v] += acc;
          }
        }
      }
    }
  }
}

}  // namespace fgaug::numkit::kernels
