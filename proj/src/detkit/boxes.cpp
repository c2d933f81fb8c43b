#include "fgaug/detkit/boxes.hpp"

#include <algorithm>
#include <cmath>

#include "fgaug/errors.hpp"

namespace fgaug::detkit {

double iou(const Box& a, const Box& b) {
  const double aa = a.area(), ba = b.area();
  if (aa <= 0 || ba <= 0) return 0.0;
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (aa + ba - inter);
}

Offsets encode_offsets(const Box& gt, const PriorBox& p) {
  if (!(gt.width() > 0 && gt.height() > 0)) {
    throw ContractError("encode_offsets: ground-truth box has non-positive size");
  }
  const double gcx = 0.5 * (gt.xmin + gt.xmax), gcy = 0.5 * (gt.ymin + gt.ymax);
  return {(gcx - p.cx) / p.w / kVariances[0], (gcy - p.cy) / p.h / kVariances[0],
          std::log(gt.width() / p.w) / kVariances[1], std::log(gt.height() / p.h) / kVariances[1]};
}

Box decode_offsets(const Offsets& o, const PriorBox& p) {
  const double cx = p.cx + o[0] * kVariances[0] * p.w;
  const double cy = p.cy + o[1] * kVariances[0] * p.h;
  const double w = p.w * std::exp(o[2] * kVariances[1]);
  const double h = p.h * std::exp(o[3] * kVariances[1]);
  return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

}  // namespace fgaug::detkit
