#pragma once

#include <cstdint>
#include <vector>

#include "fgaug/imageio/image.hpp"
#include "fgaug/numkit/layers.hpp"

namespace fgaug::sepgan {

struct GeneratorConfig {
  int depth = 3;
  int base_width = 8;
};

// Encoder-decoder with skip connections: `depth` stride-2 encoder stages,
// matching deconvolution stages concatenated with the encoder output of the
// same size, and a final 3x3 conv over (decoder output, input image) with a
// sigmoid head.
class Generator {
 public:
  Generator(GeneratorConfig cfg, std::uint64_t seed);

  // image [1, 3, H, W] -> probability map [1, 1, H, W]
  numkit::Var forward(const numkit::Binding& b, numkit::Var image);
  // Convenience: frozen forward on an image, returns [1, 1, H, W].
  numkit::Tensor predict(const imageio::Image& image);

  std::vector<numkit::ParamRef> parameters();
  const GeneratorConfig& config() const { return cfg_; }

 private:
  GeneratorConfig cfg_;
  std::vector<numkit::Conv2d> enc_;
  std::vector<numkit::Deconv2d> dec_;
  numkit::Conv2d head_;
};

struct DiscriminatorConfig {
  std::vector<int> widths{8, 16, 32, 32};
  int feature_layers = 3;  // how many stages are exposed as features
};

class Discriminator {
 public:
  Discriminator(DiscriminatorConfig cfg, std::uint64_t seed);

  struct Output {
    numkit::Var score;                  // [1, 1, 1, 1], in (0, 1)
    std::vector<numkit::Var> features;  // stage outputs 1..feature_layers
  };

  // crop [1, 3, H, W]
  Output forward(const numkit::Binding& b, numkit::Var crop);

  std::vector<numkit::ParamRef> parameters();

 private:
  DiscriminatorConfig cfg_;
  std::vector<numkit::Conv2d> stages_;
  numkit::Conv2d score_;
};

// Binarized generator mask for one image.
imageio::BinaryMask predict_mask(Generator& g, const imageio::Image& image, double threshold = 0.5);

}  // namespace fgaug::sepgan
