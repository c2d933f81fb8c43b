#pragma once

#include <array>

namespace fgaug::detkit {

// Axis-aligned box in corner form.
struct Box {
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() > 0 && height() > 0 ? width() * height() : 0.0; }
  bool operator==(const Box&) const = default;
};

// Center-size anchor in normalized image coordinates.
struct PriorBox {
  double cx = 0, cy = 0, w = 0, h = 0;

  Box corners() const { return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2}; }
  bool operator==(const PriorBox&) const = default;
};

struct Detection {
  Box box;
  int class_id = 0;
  double confidence = 0;
};

// Intersection over union; 0 when either box has zero area.
double iou(const Box& a, const Box& b);

inline constexpr std::array<double, 2> kVariances{0.1, 0.2};

using Offsets = std::array<double, 4>;

Offsets encode_offsets(const Box& gt, const PriorBox& prior);
Box decode_offsets(const Offsets& offsets, const PriorBox& prior);

}  // namespace fgaug::detkit
