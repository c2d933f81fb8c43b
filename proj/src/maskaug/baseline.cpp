#include "fgaug/maskaug/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "fgaug/errors.hpp"

namespace fgaug::maskaug {

using imageio::BinaryMask;
using imageio::GTBox;
using imageio::Image;

PairedSample hflip(const PairedSample& s) {
  PairedSample out = s;
  const int w = s.image.width, h = s.image.height, ch = s.image.channels;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) out.image.at(x, y, c) = s.image.at(w - 1 - x, y, c);
      out.mask.at(x, y) = s.mask.at(w - 1 - x, y);
    }
  for (auto& b : out.boxes) {
    const double xmin = b.xmin;
    b.xmin = w - b.xmax;
    b.xmax = w - xmin;
  }
  return out;
}

PairedSample crop_resize(const PairedSample& s, const CropRect& r) {
  const int W = s.image.width, H = s.image.height, ch = s.image.channels;
  if (r.width <= 0 || r.height <= 0 || r.x0 < 0 || r.y0 < 0 || r.x0 + r.width > W ||
      r.y0 + r.height > H) {
    throw ContractError("crop_resize: rectangle outside the image");
  }
  PairedSample out;
  out.stem = s.stem;
  out.image = Image(W, H, ch);
  out.mask = BinaryMask(W, H);
  const double sx = static_cast<double>(r.width) / W;
  const double sy = static_cast<double>(r.height) / H;
  for (int y = 0; y < H; ++y) {
    const double fy = std::clamp(r.y0 + (y + 0.5) * sy - 0.5, double(r.y0), double(r.y0 + r.height - 1));
    const int iy = static_cast<int>(std::floor(fy));
    const int iy1 = std::min(iy + 1, r.y0 + r.height - 1);
    const double ty = fy - iy;
    const int my = r.y0 + std::min(r.height - 1, static_cast<int>((y + 0.5) * sy));
    for (int x = 0; x < W; ++x) {
      const double fx = std::clamp(r.x0 + (x + 0.5) * sx - 0.5, double(r.x0), double(r.x0 + r.width - 1));
      const int ix = static_cast<int>(std::floor(fx));
      const int ix1 = std::min(ix + 1, r.x0 + r.width - 1);
      const double tx = fx - ix;
      for (int c = 0; c < ch; ++c) {
        double v = s.image.at(ix, iy, c);
        if (tx != 0.0 || ty != 0.0) {
          const double top = s.image.at(ix, iy, c) * (1 - tx) + s.image.at(ix1, iy, c) * tx;
          const double bot = s.image.at(ix, iy1, c) * (1 - tx) + s.image.at(ix1, iy1, c) * tx;
          v = top * (1 - ty) + bot * ty;
        }
        out.image.at(x, y, c) = v;
      }
      const int mx = r.x0 + std::min(r.width - 1, static_cast<int>((x + 0.5) * sx));
      out.mask.at(x, y) = s.mask.at(mx, my);
    }
  }
  for (const GTBox& b : s.boxes) {
    const double cx = 0.5 * (b.xmin + b.xmax), cy = 0.5 * (b.ymin + b.ymax);
    if (cx < r.x0 || cx > r.x0 + r.width || cy < r.y0 || cy > r.y0 + r.height) continue;
    GTBox nb = b;
    nb.xmin = (std::max(b.xmin, double(r.x0)) - r.x0) / sx;
    nb.xmax = (std::min(b.xmax, double(r.x0 + r.width)) - r.x0) / sx;
    nb.ymin = (std::max(b.ymin, double(r.y0)) - r.y0) / sy;
    nb.ymax = (std::min(b.ymax, double(r.y0 + r.height)) - r.y0) / sy;
    if (!(nb.xmin < nb.xmax && nb.ymin < nb.ymax)) continue;
    if (!imageio::box_has_mask_pixel(nb, out.mask)) continue;
    out.boxes.push_back(nb);
  }
  return out;
}

Image adjust_brightness(const Image& image, double delta) {
  Image out = image;
  for (double& v : out.pixels) v = std::clamp(v + delta, 0.0, 1.0);
  return out;
}

PairedSample baseline_augment(const PairedSample& s, numkit::Rng& rng, const BaselineOptions& opts) {
  PairedSample out = rng.bernoulli(opts.flip_prob) ? hflip(s) : s;
  if (!out.boxes.empty() && rng.bernoulli(opts.crop_prob)) {
    const int W = out.image.width, H = out.image.height;
    for (int attempt = 0; attempt < opts.crop_attempts; ++attempt) {
      const int cw = static_cast<int>(std::lround(rng.uniform(opts.min_crop_frac, 1.0) * W));
      const int chh = static_cast<int>(std::lround(rng.uniform(opts.min_crop_frac, 1.0) * H));
      const int x0 = static_cast<int>(rng.uniform_int(0, W - cw));
      const int y0 = static_cast<int>(rng.uniform_int(0, H - chh));
      PairedSample cropped = crop_resize(out, {x0, y0, cw, chh});
      if (!cropped.boxes.empty()) {
        out = std::move(cropped);
        break;
      }
    }
  }
  out.image = adjust_brightness(out.image, rng.uniform(-opts.brightness_delta, opts.brightness_delta));
  return out;
}

}  // namespace fgaug::maskaug
