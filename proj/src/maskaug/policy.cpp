#include "fgaug/maskaug/policy.hpp"

#include <cmath>

#include "fgaug/errors.hpp"
#include "fgaug/maskaug/perturb.hpp"

namespace fgaug::maskaug {

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::None: return "none";
    case Mode::Channel: return "channel";
    case Mode::Salt: return "salt";
    case Mode::Contrast: return "contrast";
  }
  return "?";
}

void validate(const AugmentPolicy& p) {
  std::string errors;
  auto fail = [&errors](const std::string& m) { errors += "\n  " + m; };
  if (!(p.batch_prob >= 0.0 && p.batch_prob <= 1.0)) fail("batch_prob must lie in [0,1]");
  if (p.batch_size < 1) fail("batch_size must be >= 1");
  if (p.n_min < 1 || p.n_max < p.n_min || p.n_max > p.batch_size) {
    fail("n range [" + std::to_string(p.n_min) + ", " + std::to_string(p.n_max) +
         "] must lie within [1, batch_size]");
  }
  double total = 0.0;
  for (double w : p.mode_weights) {
    if (w < 0.0) fail("mode weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("mode weights must sum to 1");
  if (!(p.salt_density >= 0.0 && p.salt_density <= 1.0)) fail("salt_density must lie in [0,1]");
  if (!(p.contrast_alpha_min > 0.0 && p.contrast_alpha_min <= p.contrast_alpha_max)) {
    fail("contrast alpha range must be positive and non-empty");
  }
  if (!errors.empty()) throw ConfigError("invalid augment policy:" + errors);
}

EnhancedBatch enhance_batch(const std::vector<imageio::PairedSample>& batch,
                            const AugmentPolicy& policy, numkit::Rng& rng) {
  validate(policy);
  if (static_cast<int>(batch.size()) != policy.batch_size) {
    throw ContractError("enhance_batch: batch has " + std::to_string(batch.size()) +
                        " samples, policy expects " + std::to_string(policy.batch_size));
  }
  EnhancedBatch out;
  out.samples = batch;
  out.modes.assign(batch.size(), Mode::None);
  const std::uint64_t batch_key = rng.next_u64();
  out.applied = rng.bernoulli(policy.batch_prob);
  if (!out.applied) return out;
  out.n = static_cast<int>(rng.uniform_int(policy.n_min, policy.n_max));

  for (int i = 0; i < out.n; ++i) {
    numkit::Rng sub(numkit::mix_seed(batch_key, static_cast<std::uint64_t>(i)));
    const double u = sub.uniform();
    Mode mode = Mode::Contrast;
    if (u < policy.mode_weights[0]) {
      mode = Mode::Channel;
    } else if (u < policy.mode_weights[0] + policy.mode_weights[1]) {
      mode = Mode::Salt;
    }
    auto& s = out.samples[static_cast<std::size_t>(i)];
    switch (mode) {
      case Mode::Channel: s.image = perturb_channels(s.image, s.mask, sub); break;
      case Mode::Salt: s.image = add_salt_noise(s.image, s.mask, policy.salt_density, sub); break;
      case Mode::Contrast:
        s.image = enhance_contrast(
            s.image, s.mask, sub.uniform(policy.contrast_alpha_min, policy.contrast_alpha_max));
        break;
      case Mode::None: break;
    }
    out.modes[static_cast<std::size_t>(i)] = mode;
  }
  return out;
}

}  // namespace fgaug::maskaug
