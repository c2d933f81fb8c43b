#include "fgaug/sepgan/networks.hpp"

#include "fgaug/errors.hpp"
#include "fgaug/maskaug/mask_ops.hpp"

namespace fgaug::sepgan {

using numkit::Binding;
using numkit::Var;

namespace {

constexpr double kInputGain = 4.0;

template <typename Layer>
void init_layer(Layer& l, std::size_t fan_in, numkit::Rng& rng) {
  numkit::init_uniform(l.weight, fan_in, rng);
}

}  // namespace

Generator::Generator(GeneratorConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg_.depth < 1) throw ConfigError("generator depth must be >= 1");
  if (cfg_.base_width < 1) throw ConfigError("generator width must be >= 1");
  numkit::Rng rng(seed);
  auto width = [&](int i) { return static_cast<std::size_t>(cfg_.base_width) << i; };
  std::size_t in = 3;
  for (int i = 0; i < cfg_.depth; ++i) {
    enc_.emplace_back(in, width(i), 4, 2, 1);
    init_layer(enc_.back(), in * 16, rng);
    in = width(i);
  }
  // dec_[0] is the deepest stage.
  for (int i = cfg_.depth - 1; i >= 0; --i) {
    const std::size_t din = i == cfg_.depth - 1 ? width(i) : 2 * width(i);
    const std::size_t dout = i > 0 ? width(i - 1) : width(0);
    dec_.emplace_back(din, dout, 4, 2, 1);
    init_layer(dec_.back(), din * 4, rng);
  }
  head_ = numkit::Conv2d(width(0) + 3, 1, 3, 1, 1);
  init_layer(head_, (width(0) + 3) * 9, rng);
}

Var Generator::forward(const Binding& b, Var image) {
  const auto& s = image.shape();
  const std::size_t mult = std::size_t{1} << cfg_.depth;
  if (s.size() != 4 || s[0] != 1 || s[1] != 3) {
    throw ContractError("generator: expected [1, 3, H, W], got " + numkit::shape_str(s));
  }
  if (s[2] % mult != 0 || s[3] % mult != 0) {
    throw ContractError("generator: image " + std::to_string(s[3]) + "x" + std::to_string(s[2]) +
                        " must have sides that are multiples of " + std::to_string(mult));
  }
  // Per-image channel centering: the background dominates every scene, so
  // distance from the channel mean is already a strong foreground cue.
  Var centered = numkit::scale(numkit::center_channels(image), kInputGain);
  std::vector<Var> skips;
  Var x = centered;
  for (auto& e : enc_) {
    x = numkit::leaky_relu(e(b, x));
    skips.push_back(x);
  }
  const int depth = cfg_.depth;
  for (int k = 0; k < depth; ++k) {
    const int level = depth - 1 - k;
    x = numkit::relu(dec_[static_cast<std::size_t>(k)](b, x));
    if (level > 0) x = numkit::concat_channels(x, skips[static_cast<std::size_t>(level - 1)]);
  }
  x = numkit::concat_channels(x, centered);
  return numkit::sigmoid(head_(b, x));
}

numkit::Tensor Generator::predict(const imageio::Image& image) {
  numkit::Graph g;
  return forward(Binding{&g, false}, g.input(imageio::to_tensor(image))).value();
}

std::vector<numkit::ParamRef> Generator::parameters() {
  std::vector<numkit::ParamRef> out;
  for (std::size_t i = 0; i < enc_.size(); ++i) enc_[i].collect("G/enc" + std::to_string(i), out);
  for (std::size_t i = 0; i < dec_.size(); ++i) dec_[i].collect("G/dec" + std::to_string(i), out);
  head_.collect("G/head", out);
  return out;
}

Discriminator::Discriminator(DiscriminatorConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  if (cfg_.widths.empty()) throw ConfigError("discriminator needs at least one stage");
  if (cfg_.feature_layers < 1 || cfg_.feature_layers > static_cast<int>(cfg_.widths.size())) {
    throw ConfigError("discriminator feature_layers must lie in [1, stages]");
  }
  numkit::Rng rng(seed);
  std::size_t in = 3;
  for (int w : cfg_.widths) {
    stages_.emplace_back(in, static_cast<std::size_t>(w), 4, 2, 1);
    init_layer(stages_.back(), in * 16, rng);
    in = static_cast<std::size_t>(w);
  }
  score_ = numkit::Conv2d(in, 1, 1, 1, 0);
  init_layer(score_, in, rng);
}

Discriminator::Output Discriminator::forward(const Binding& b, Var crop) {
  const auto& s = crop.shape();
  if (s.size() != 4 || s[0] != 1 || s[1] != 3) {
    throw ContractError("discriminator: expected [1, 3, H, W], got " + numkit::shape_str(s));
  }
  Output out;
  Var x = crop;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    x = numkit::leaky_relu(stages_[i](b, x));
    if (static_cast<int>(i) < cfg_.feature_layers) out.features.push_back(x);
  }
  out.score = numkit::sigmoid(score_(b, numkit::global_avg_pool(x)));
  return out;
}

std::vector<numkit::ParamRef> Discriminator::parameters() {
  std::vector<numkit::ParamRef> out;
  for (std::size_t i = 0; i < stages_.size(); ++i) stages_[i].collect("D/stage" + std::to_string(i), out);
  score_.collect("D/score", out);
  return out;
}

imageio::BinaryMask predict_mask(Generator& g, const imageio::Image& image, double threshold) {
  return maskaug::binarize(g.predict(image), threshold);
}

}  // namespace fgaug::sepgan
