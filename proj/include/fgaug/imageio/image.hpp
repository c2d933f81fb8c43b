#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgaug/numkit/tensor.hpp"

namespace fgaug::imageio {

// Pixels in [0, 1], row-major, channel-interleaved (HWC).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0);

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  double& at(int x, int y, int c) { return pixels[index(x, y, c)]; }
  double at(int x, int y, int c) const { return pixels[index(x, y, c)]; }

  bool operator==(const Image&) const = default;
};

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // exactly 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const;

  bool operator==(const BinaryMask&) const = default;
};

// Half-open pixel coordinates: the box covers columns [xmin, xmax) and rows
// [ymin, ymax).
struct GTBox {
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
  int class_id = 0;
  bool difficult = false;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool operator==(const GTBox&) const = default;
};

struct PairedSample {
  std::string stem;
  Image image;
  BinaryMask mask;
  std::vector<GTBox> boxes;
};

// Pixel (x, y) belongs to a box when its center lies inside it.
bool box_contains_pixel(const GTBox& box, int x, int y);
bool box_has_mask_pixel(const GTBox& box, const BinaryMask& mask);

// Throws DatasetError describing the first violated invariant.
void validate_sample(const PairedSample& s);

// [1, C, H, W]
numkit::Tensor to_tensor(const Image& image);
// [1, 1, H, W]
numkit::Tensor to_tensor(const BinaryMask& mask);

double mask_iou(const BinaryMask& a, const BinaryMask& b);

}  // namespace fgaug::imageio
