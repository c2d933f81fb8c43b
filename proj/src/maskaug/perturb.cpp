#include "fgaug/maskaug/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fgaug/errors.hpp"

namespace fgaug::maskaug {

namespace {

void require_match(const char* op, const Image& image, const BinaryMask& mask) {
  if (image.width != mask.width || image.height != mask.height) {
    throw ContractError(std::string(op) + ": image and mask sizes differ");
  }
}

std::vector<std::size_t> foreground_pixels(const BinaryMask& mask) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mask.values.size(); ++i)
    if (mask.values[i]) idx.push_back(i);
  return idx;
}

}  // namespace

const std::array<ChannelPermutation, 5>& non_identity_permutations() {
  static const std::array<ChannelPermutation, 5> perms{{
      {0, 2, 1},
      {1, 0, 2},
      {1, 2, 0},
      {2, 0, 1},
      {2, 1, 0},
  }};
  return perms;
}

Image apply_channel_permutation(const Image& image, const BinaryMask& mask,
                                const ChannelPermutation& perm) {
  require_match("perturb_channels", image, mask);
  if (image.channels != 3) throw ContractError("perturb_channels: needs a 3-channel image");
  Image out = image;
  for (std::size_t p = 0; p < mask.values.size(); ++p) {
    if (!mask.values[p]) continue;
    for (int c = 0; c < 3; ++c) out.pixels[p * 3 + c] = image.pixels[p * 3 + perm[c]];
  }
  return out;
}

Image perturb_channels(const Image& image, const BinaryMask& mask, numkit::Rng& rng) {
  if (image.channels != 3) throw ContractError("perturb_channels: needs a 3-channel image");
  const auto& perms = non_identity_permutations();
  return apply_channel_permutation(image, mask, perms[static_cast<std::size_t>(rng.uniform_int(0, 4))]);
}

Image add_salt_noise(const Image& image, const BinaryMask& mask, double density, numkit::Rng& rng) {
  require_match("add_salt_noise", image, mask);
  if (!(density >= 0.0 && density <= 1.0)) throw ContractError("add_salt_noise: density outside [0,1]");
  std::vector<std::size_t> fg = foreground_pixels(mask);
  const auto count = static_cast<std::size_t>(std::llround(density * static_cast<double>(fg.size())));
  // Partial Fisher-Yates: the first `count` entries are a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(fg.size()) - 1));
    std::swap(fg[i], fg[j]);
  }
  Image out = image;
  for (std::size_t i = 0; i < count; ++i)
    for (int c = 0; c < image.channels; ++c) out.pixels[fg[i] * image.channels + c] = 1.0;
  return out;
}

Image enhance_contrast(const Image& image, const BinaryMask& mask, double alpha) {
  require_match("enhance_contrast", image, mask);
  if (!(alpha > 0.0)) throw ContractError("enhance_contrast: alpha must be positive");
  const std::vector<std::size_t> fg = foreground_pixels(mask);
  if (fg.empty() || alpha == 1.0) return image;
  const int ch = image.channels;
  // Mean taken relative to the first foreground value so a constant region
  // yields mu equal to that value exactly.
  std::vector<double> mu(static_cast<std::size_t>(ch), 0.0);
  for (int c = 0; c < ch; ++c) {
    const double ref = image.pixels[fg[0] * ch + c];
    double acc = 0.0;
    for (std::size_t p : fg) acc += image.pixels[p * ch + c] - ref;
    mu[c] = ref + acc / static_cast<double>(fg.size());
  }
  Image out = image;
  for (std::size_t p : fg)
    for (int c = 0; c < ch; ++c) {
      const double in = image.pixels[p * ch + c];
      out.pixels[p * ch + c] = std::clamp(mu[c] + alpha * (in - mu[c]), 0.0, 1.0);
    }
  return out;
}

}  // namespace fgaug::maskaug
