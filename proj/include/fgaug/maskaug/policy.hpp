#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fgaug/imageio/image.hpp"
#include "fgaug/numkit/rng.hpp"

namespace fgaug::maskaug {

enum class Mode { None, Channel, Salt, Contrast };

const char* mode_name(Mode mode);

struct AugmentPolicy {
  double batch_prob = 0.5;
  int batch_size = 8;
  int n_min = 1;  // inclusive
  int n_max = 7;  // inclusive
  // Probabilities over {channel, salt, contrast}.
  std::array<double, 3> mode_weights{1.0 / 3, 1.0 / 3, 1.0 / 3};
  double salt_density = 0.05;
  double contrast_alpha_min = 1.2;
  double contrast_alpha_max = 1.8;
  std::uint64_t rng_seed = 0;
};

// Throws ConfigError listing every violated invariant.
void validate(const AugmentPolicy& policy);

struct EnhancedBatch {
  std::vector<imageio::PairedSample> samples;
  bool applied = false;
  int n = 0;                // number of leading samples perturbed
  std::vector<Mode> modes;  // per sample, None when untouched
};

// With probability batch_prob, draws N from [n_min, n_max] and perturbs the
// first N samples, each with a mode drawn from mode_weights. Masks and boxes
// pass through unchanged. Sample i draws from its own sub-stream keyed by
// (batch draw, i), so results do not depend on processing order.
EnhancedBatch enhance_batch(const std::vector<imageio::PairedSample>& batch,
                            const AugmentPolicy& policy, numkit::Rng& rng);

}  // namespace fgaug::maskaug
