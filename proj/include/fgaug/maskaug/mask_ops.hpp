#pragma once

#include "fgaug/imageio/image.hpp"
#include "fgaug/numkit/tensor.hpp"

namespace fgaug::maskaug {

using imageio::BinaryMask;
using imageio::Image;

// prob_map: [1, 1, H, W] (or [H, W]) with values in [0, 1]. Values >= threshold
// become 1.
BinaryMask binarize(const numkit::Tensor& prob_map, double threshold = 0.5);

// I_CROP: pixels kept where mask == 1, zeroed elsewhere, across all channels.
Image mask_multiply(const Image& image, const BinaryMask& mask);

}  // namespace fgaug::maskaug
