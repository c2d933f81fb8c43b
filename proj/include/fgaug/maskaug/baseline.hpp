#pragma once

#include "fgaug/imageio/image.hpp"
#include "fgaug/numkit/rng.hpp"

namespace fgaug::maskaug {

using imageio::PairedSample;

struct BaselineOptions {
  double flip_prob = 0.5;
  double crop_prob = 0.5;
  double min_crop_frac = 0.6;  // crop side as a fraction of the image side
  double brightness_delta = 0.125;
  int crop_attempts = 50;
};

struct CropRect {
  int x0, y0, width, height;
};

PairedSample hflip(const PairedSample& s);
// Crops and resizes back to the input size (bilinear image, nearest mask).
// Keeps boxes whose center falls inside the crop and that still enclose a
// mask pixel afterwards; boxes are clipped to the crop.
PairedSample crop_resize(const PairedSample& s, const CropRect& rect);
imageio::Image adjust_brightness(const imageio::Image& image, double delta);

// Random flip, random crop retaining at least one box, and a full-image
// brightness shift.
PairedSample baseline_augment(const PairedSample& s, numkit::Rng& rng,
                              const BaselineOptions& opts = {});

}  // namespace fgaug::maskaug
