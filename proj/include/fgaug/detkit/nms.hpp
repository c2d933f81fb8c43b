#pragma once

#include <cstddef>
#include <vector>

#include "fgaug/detkit/boxes.hpp"

namespace fgaug::detkit {

// Greedy suppression in descending confidence (ties: lower index first).
// A box is dropped when its IoU with an already kept box (of the same class
// when per_class) exceeds the threshold. Returns kept input indices in
// processing order.
std::vector<std::size_t> nms(const std::vector<Detection>& dets, double iou_threshold = 0.45,
                             bool per_class = true);

}  // namespace fgaug::detkit
