#include "fgaug/detkit/nms.hpp"

#include <algorithm>
#include <numeric>

namespace fgaug::detkit {

std::vector<std::size_t> nms(const std::vector<Detection>& dets, double iou_threshold,
                             bool per_class) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool suppressed = false;
    for (std::size_t k : kept) {
      if (per_class && dets[k].class_id != dets[i].class_id) continue;
      if (iou(dets[k].box, dets[i].box) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

}  // namespace fgaug::detkit
