#include "fgaug/detkit/detector.hpp"

#include <algorithm>
#include <cmath>

#include "fgaug/detkit/nms.hpp"
#include "fgaug/errors.hpp"

namespace fgaug::detkit {

using numkit::Binding;
using numkit::Var;

std::vector<int> pyramid_resolutions(int input_size) {
  std::vector<int> out{input_size};
  while (out.back() > 1) out.push_back((out.back() + 1) / 2);
  return out;
}

Detector::Detector(DetectorConfig config, std::uint64_t seed) : config_(std::move(config)) {
  const auto& specs = config_.layers;
  if (specs.empty()) throw ConfigError("detector: no prediction layers configured");
  if (config_.num_classes < 1) throw ConfigError("detector: num_classes must be >= 1");
  if (config_.width < 1) throw ConfigError("detector: width must be >= 1");
  const auto chain = pyramid_resolutions(config_.input_size);
  auto it = std::find(chain.begin(), chain.end(), specs.front().resolution);
  if (it == chain.end() || it == chain.begin()) {
    throw ConfigError("detector: layer resolution " + std::to_string(specs.front().resolution) +
                      " is not reachable by stride-2 convolution from input " +
                      std::to_string(config_.input_size));
  }
  first_scale_ = static_cast<std::size_t>(it - chain.begin());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (first_scale_ + i >= chain.size() || chain[first_scale_ + i] != specs[i].resolution) {
      throw ConfigError("detector: layer resolutions must follow the halving chain; expected " +
                        (first_scale_ + i < chain.size() ? std::to_string(chain[first_scale_ + i])
                                                         : std::string("none")) +
                        " at layer " + std::to_string(i) + ", got " +
                        std::to_string(specs[i].resolution));
    }
  }
  priors_ = gen_prior_boxes(specs);

  numkit::Rng rng(seed);
  const std::size_t w = static_cast<std::size_t>(config_.width);
  auto init_conv = [&rng](auto& layer, std::size_t fan_in) {
    numkit::init_he_uniform(layer.weight, fan_in, rng);
  };
  auto init_head = [&rng](auto& layer, std::size_t fan_in) {
    numkit::init_uniform(layer.weight, fan_in, rng);
  };
  stem_ = numkit::Conv2d(3, w, 3, 1, 1);
  init_conv(stem_, 3 * 9);
  const std::size_t n_down = first_scale_ + specs.size() - 1;
  for (std::size_t i = 0; i < n_down; ++i) {
    down_.emplace_back(w, w, 3, 2, 1);
    init_conv(down_.back(), w * 9);
  }
  for (std::size_t i = 0; i + 1 < specs.size(); ++i) {
    const std::size_t k = specs[i].resolution % 2 == 0 ? 4 : 3;
    up_.emplace_back(w, w, k, 2, 1);
    // Deconv fan-in: each output sees about (k/stride)^2 input taps per channel.
    init_conv(up_.back(), w * (k / 2) * (k / 2));
  }
  const std::size_t classes = static_cast<std::size_t>(config_.num_classes) + 1;
  for (const auto& s : specs) {
    const std::size_t a = static_cast<std::size_t>(boxes_per_cell(s));
    cls_head_.emplace_back(w, a * classes, 3, 1, 1);
    init_head(cls_head_.back(), w * 9);
    loc_head_.emplace_back(w, a * 4, 3, 1, 1);
    init_head(loc_head_.back(), w * 9);
  }
}

Detector::Output Detector::forward(const Binding& b, Var image) {
  const auto& s = image.shape();
  const std::size_t n = static_cast<std::size_t>(config_.input_size);
  if (s.size() != 4 || s[0] != 1 || s[1] != 3 || s[2] != n || s[3] != n) {
    throw ContractError("detector: expected input [1, 3, " + std::to_string(n) + ", " +
                        std::to_string(n) + "], got " + numkit::shape_str(s));
  }
  std::vector<Var> feats;
  // Per-image channel centering; raw [0, 1] input trains far slower.
  Var x = numkit::relu(stem_(b, numkit::center_channels(image)));
  feats.push_back(x);
  for (auto& d : down_) {
    x = numkit::relu(d(b, x));
    feats.push_back(x);
  }

  const std::size_t F = config_.layers.size();
  std::vector<Var> fused(F);
  fused[F - 1] = feats[first_scale_ + F - 1];
  for (std::size_t i = F - 1; i-- > 0;) {
    Var up = up_[i](b, fused[i + 1]);
    Var lat = feats[first_scale_ + i];
    fused[i] = numkit::relu(config_.fusion == Fusion::Add ? numkit::add(lat, up)
                                                          : numkit::mul(lat, up));
  }

  const std::size_t classes = static_cast<std::size_t>(config_.num_classes) + 1;
  std::vector<Var> cls_parts, loc_parts;
  for (std::size_t i = 0; i < F; ++i) {
    cls_parts.push_back(numkit::anchor_rows(cls_head_[i](b, fused[i]), classes));
    loc_parts.push_back(numkit::anchor_rows(loc_head_[i](b, fused[i]), 4));
  }
  return {numkit::concat_rows(cls_parts), numkit::concat_rows(loc_parts)};
}

std::vector<double> softmax_rows(const numkit::Tensor& logits) {
  const std::size_t P = logits.shape.at(0), K = logits.shape.at(1);
  std::vector<double> out(P * K);
  for (std::size_t p = 0; p < P; ++p) {
    const double* row = &logits.data[p * K];
    const double m = *std::max_element(row, row + K);
    double s = 0;
    for (std::size_t k = 0; k < K; ++k) s += out[p * K + k] = std::exp(row[k] - m);
    for (std::size_t k = 0; k < K; ++k) out[p * K + k] /= s;
  }
  return out;
}

std::vector<Detection> Detector::detect(const imageio::Image& image, const DetectOptions& opts) {
  numkit::Graph g;
  Output out = forward(Binding{&g, false}, g.input(imageio::to_tensor(image)));
  const auto prob = softmax_rows(out.logits.value());
  const auto& off = out.offsets.value().data;
  const std::size_t K = static_cast<std::size_t>(config_.num_classes) + 1;
  const double sx = image.width, sy = image.height;

  std::vector<Detection> cand;
  for (std::size_t p = 0; p < priors_.size(); ++p) {
    Box box;
    bool decoded = false;
    for (std::size_t k = 1; k < K; ++k) {
      const double conf = prob[p * K + k];
      if (conf <= opts.confidence_threshold) continue;
      if (!decoded) {
        box = decode_offsets({off[p * 4], off[p * 4 + 1], off[p * 4 + 2], off[p * 4 + 3]}, priors_[p]);
        box = {std::clamp(box.xmin, 0.0, 1.0) * sx, std::clamp(box.ymin, 0.0, 1.0) * sy,
               std::clamp(box.xmax, 0.0, 1.0) * sx, std::clamp(box.ymax, 0.0, 1.0) * sy};
        decoded = true;
      }
      if (box.area() <= 0) break;
      cand.push_back({box, static_cast<int>(k) - 1, conf});
    }
  }
  const auto kept = nms(cand, opts.nms_threshold, true);
  std::vector<Detection> dets;
  for (std::size_t i = 0; i < kept.size() && i < opts.top_k; ++i) dets.push_back(cand[kept[i]]);
  return dets;
}

std::vector<numkit::ParamRef> Detector::parameters() {
  std::vector<numkit::ParamRef> out;
  stem_.collect("det/stem", out);
  for (std::size_t i = 0; i < down_.size(); ++i) down_[i].collect("det/down" + std::to_string(i), out);
  for (std::size_t i = 0; i < up_.size(); ++i) up_[i].collect("det/up" + std::to_string(i), out);
  for (std::size_t i = 0; i < cls_head_.size(); ++i) {
    cls_head_[i].collect("det/cls" + std::to_string(i), out);
    loc_head_[i].collect("det/loc" + std::to_string(i), out);
  }
  return out;
}

}  // namespace fgaug::detkit
