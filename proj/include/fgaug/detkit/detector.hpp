#pragma once

#include <cstdint>
#include <vector>

#include "fgaug/detkit/boxes.hpp"
#include "fgaug/detkit/priors.hpp"
#include "fgaug/imageio/image.hpp"
#include "fgaug/numkit/layers.hpp"

namespace fgaug::detkit {

enum class Fusion { Add, Mul };

struct DetectorConfig {
  int input_size = 64;
  int num_classes = 3;
  int width = 16;  // channels throughout the pyramid
  std::vector<LayerSpec> layers = desk_pyramid_specs();
  Fusion fusion = Fusion::Add;
};

// Feature-map sides produced by repeated stride-2 convolution: ceil halving.
std::vector<int> pyramid_resolutions(int input_size);

struct DetectOptions {
  double confidence_threshold = 0.01;
  double nms_threshold = 0.45;
  std::size_t top_k = 100;
};

// Toy multi-scale detector: a stride-1 stem, stride-2 convolutions down to
// the coarsest prediction scale, top-down deconvolution modules fused into
// each finer scale, and a plain 3x3 conv head per scale.
class Detector {
 public:
  Detector(DetectorConfig config, std::uint64_t seed);

  struct Output {
    numkit::Var logits;   // [P, C+1]
    numkit::Var offsets;  // [P, 4]
  };

  // image: [1, 3, S, S]
  Output forward(const numkit::Binding& binding, numkit::Var image);

  // Full inference path: forward, softmax, decode, per-class NMS. Boxes are
  // returned in pixel coordinates.
  std::vector<Detection> detect(const imageio::Image& image, const DetectOptions& opts = {});

  std::vector<numkit::ParamRef> parameters();
  const DetectorConfig& config() const { return config_; }
  const std::vector<PriorBox>& priors() const { return priors_; }

 private:
  DetectorConfig config_;
  std::vector<PriorBox> priors_;
  std::size_t first_scale_ = 0;  // index into the backbone outputs
  numkit::Conv2d stem_;
  std::vector<numkit::Conv2d> down_;
  std::vector<numkit::Deconv2d> up_;  // up_[i] lifts scale i+1 to scale i
  std::vector<numkit::Conv2d> cls_head_;
  std::vector<numkit::Conv2d> loc_head_;
};

// Row-wise softmax of a [P, C+1] tensor.
std::vector<double> softmax_rows(const numkit::Tensor& logits);

}  // namespace fgaug::detkit
