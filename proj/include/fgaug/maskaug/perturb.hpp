#pragma once

#include <array>

#include "fgaug/imageio/image.hpp"
#include "fgaug/numkit/rng.hpp"

namespace fgaug::maskaug {

using imageio::BinaryMask;
using imageio::Image;

// perm[c] is the source channel for output channel c.
using ChannelPermutation = std::array<int, 3>;

// The five non-identity permutations of (R, G, B) in lexicographic order.
const std::array<ChannelPermutation, 5>& non_identity_permutations();

Image apply_channel_permutation(const Image& image, const BinaryMask& mask,
                                const ChannelPermutation& perm);
// Uniform draw over the five non-identity permutations, applied inside the mask.
Image perturb_channels(const Image& image, const BinaryMask& mask, numkit::Rng& rng);

// Sets exactly round(density * |foreground|) foreground pixels, drawn without
// replacement, to 1.0 in every channel.
Image add_salt_noise(const Image& image, const BinaryMask& mask, double density, numkit::Rng& rng);

// Inside the mask: out = clamp(mu + alpha * (in - mu), 0, 1), with mu the
// per-channel foreground mean. An empty mask leaves the image unchanged.
Image enhance_contrast(const Image& image, const BinaryMask& mask, double alpha);

}  // namespace fgaug::maskaug
