#include "fgaug/maskaug/mask_ops.hpp"

#include "fgaug/errors.hpp"

namespace fgaug::maskaug {

BinaryMask binarize(const numkit::Tensor& prob_map, double threshold) {
  const auto& s = prob_map.shape;
  const bool nchw = s.size() == 4 && s[0] == 1 && s[1] == 1;
  if (!nchw && s.size() != 2) {
    throw ContractError("binarize: expected [1,1,H,W] or [H,W], got " + numkit::shape_str(s));
  }
  const int h = static_cast<int>(s[s.size() - 2]);
  const int w = static_cast<int>(s[s.size() - 1]);
  BinaryMask m(w, h);
  for (std::size_t i = 0; i < prob_map.data.size(); ++i) {
    const double v = prob_map.data[i];
    if (!(v >= 0.0 && v <= 1.0)) throw ContractError("binarize: value outside [0,1]");
    m.values[i] = v >= threshold ? 1 : 0;
  }
  return m;
}

Image mask_multiply(const Image& image, const BinaryMask& mask) {
  if (image.width != mask.width || image.height != mask.height) {
    throw ContractError("mask_multiply: image " + std::to_string(image.width) + "x" +
                        std::to_string(image.height) + " vs mask " + std::to_string(mask.width) +
                        "x" + std::to_string(mask.height));
  }
  Image out = image;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      if (!mask.at(x, y))
        for (int c = 0; c < image.channels; ++c) out.at(x, y, c) = 0.0;
  return out;
}

}  // namespace fgaug::maskaug
