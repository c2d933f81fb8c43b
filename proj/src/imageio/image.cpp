#include "fgaug/imageio/image.hpp"

#include <cmath>

#include "fgaug/errors.hpp"

namespace fgaug::imageio {

Image::Image(int w, int h, int c, double fill)
    : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, fill) {
  if (w <= 0 || h <= 0) throw ContractError("image dimensions must be positive");
  if (c != 1 && c != 3) throw ContractError("image must have 1 or 3 channels");
}

BinaryMask::BinaryMask(int w, int h, std::uint8_t fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
  if (w <= 0 || h <= 0) throw ContractError("mask dimensions must be positive");
}

std::size_t BinaryMask::count() const {
  std::size_t n = 0;
  for (auto v : values) n += v;
  return n;
}

bool box_contains_pixel(const GTBox& box, int x, int y) {
  const double cx = x + 0.5, cy = y + 0.5;
  return cx >= box.xmin && cx <= box.xmax && cy >= box.ymin && cy <= box.ymax;
}

bool box_has_mask_pixel(const GTBox& box, const BinaryMask& mask) {
  const int x0 = std::max(0, static_cast<int>(std::floor(box.xmin)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.ymin)));
  const int x1 = std::min(mask.width - 1, static_cast<int>(std::ceil(box.xmax)));
  const int y1 = std::min(mask.height - 1, static_cast<int>(std::ceil(box.ymax)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (mask.at(x, y) && box_contains_pixel(box, x, y)) return true;
  return false;
}

void validate_sample(const PairedSample& s) {
  const std::string who = s.stem.empty() ? "sample" : s.stem;
  if (s.image.width != s.mask.width || s.image.height != s.mask.height) {
    throw DatasetError(who + ": image " + std::to_string(s.image.width) + "x" +
                       std::to_string(s.image.height) + " but mask " +
                       std::to_string(s.mask.width) + "x" + std::to_string(s.mask.height));
  }
  for (double v : s.image.pixels) {
    if (!(v >= 0.0 && v <= 1.0)) throw DatasetError(who + ": pixel value outside [0,1]");
  }
  for (auto v : s.mask.values) {
    if (v > 1) throw DatasetError(who + ": mask value not in {0,1}");
  }
  for (std::size_t i = 0; i < s.boxes.size(); ++i) {
    const GTBox& b = s.boxes[i];
    const std::string id = who + " box " + std::to_string(i);
    if (!(b.xmin < b.xmax && b.ymin < b.ymax)) throw DatasetError(id + ": inverted coordinates");
    if (b.xmin < 0 || b.ymin < 0 || b.xmax > s.image.width || b.ymax > s.image.height) {
      throw DatasetError(id + ": outside image bounds");
    }
    if (!box_has_mask_pixel(b, s.mask)) throw DatasetError(id + ": encloses no mask pixel");
  }
}

numkit::Tensor to_tensor(const Image& image) {
  const auto c = static_cast<std::size_t>(image.channels);
  const auto h = static_cast<std::size_t>(image.height);
  const auto w = static_cast<std::size_t>(image.width);
  numkit::Tensor t({1, c, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t ch = 0; ch < c; ++ch)
        t.data[(ch * h + y) * w + x] = image.pixels[(y * w + x) * c + ch];
  return t;
}

numkit::Tensor to_tensor(const BinaryMask& mask) {
  numkit::Tensor t({1, 1, static_cast<std::size_t>(mask.height),
                    static_cast<std::size_t>(mask.width)});
  for (std::size_t i = 0; i < mask.values.size(); ++i) t.data[i] = mask.values[i];
  return t;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width != b.width || a.height != b.height) throw ContractError("mask_iou: size mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    inter += a.values[i] & b.values[i];
    uni += a.values[i] | b.values[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace fgaug::imageio
