#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "fgaug/imageio/image.hpp"
#include "fgaug/numkit/optim.hpp"
#include "fgaug/sepgan/networks.hpp"

namespace fgaug::sepgan {

struct GanTrainConfig {
  numkit::Schedule schedule;  // epochs and learning rates
  int batch_size = 8;
  double lambda_p = 100.0;
  double d_lr_scale = 0.03;  // discriminator lr relative to the schedule
  std::uint64_t seed = 0;
  numkit::OptimizerConfig optimizer{numkit::OptimizerKind::Adam};
};

struct EpochLosses {
  int epoch = 0;
  double l_gan_d = 0;
  double l_gan_g = 0;
  double l_perceptual = 0;
  double total_g = 0;  // l_gan_g + lambda_p * l_perceptual
};

struct GanHistory {
  std::vector<EpochLosses> epochs;
  std::uint64_t frozen_checksum_before = 0;
  std::uint64_t frozen_checksum_after = 0;
};

// I_CROP for a soft map: image * binarize(map) across channels.
imageio::Image fake_crop(const imageio::Image& image, const numkit::Tensor& prob_map);

// Alternating D then G updates per batch. `frozen` (the detector) is
// checksummed before and after and must not change. Throws NumericError
// with the epoch index when a loss stops being finite.
GanHistory train_sepgan(Generator& g, Discriminator& d,
                        const std::vector<imageio::PairedSample>& samples,
                        const std::vector<numkit::ParamRef>& frozen, const GanTrainConfig& cfg,
                        const std::function<void(const EpochLosses&)>& on_epoch = {});

void write_loss_history(const std::filesystem::path& path, const GanHistory& h);

double mean_mask_iou(Generator& g, const std::vector<imageio::PairedSample>& samples);

}  // namespace fgaug::sepgan
