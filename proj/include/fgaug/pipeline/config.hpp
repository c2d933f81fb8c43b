#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fgaug/detkit/detector.hpp"
#include "fgaug/imageio/synthetic.hpp"
#include "fgaug/maskaug/policy.hpp"
#include "fgaug/numkit/optim.hpp"

namespace fgaug::pipeline {

struct DatasetSection {
  std::string kind = "synthetic";  // synthetic (generated in memory) or pairs (on disk)
  std::vector<std::string> train_roots;
  std::vector<std::string> test_roots;
  std::string class_table;  // pairs only; empty means <root>/classes.txt
  std::uint64_t seed = 1;
  std::size_t n_train = 500;
  std::size_t n_test = 100;
  imageio::SceneConfig scene;
};

struct ModelSection {
  int input_size = 64;
  std::vector<detkit::LayerSpec> layers = detkit::desk_pyramid_specs();
  double scale_min = 0.1;
  double scale_max = 0.9;
  int width = 16;
  detkit::Fusion fusion = detkit::Fusion::Add;
  int generator_depth = 3;
  int generator_width = 8;
};

struct AugmentSection {
  maskaug::AugmentPolicy policy;  // batch_size follows train.batch_size
  bool use_gt_masks = false;  // ablation: perturb with ground-truth masks
};

struct TrainSection {
  int batch_size = 8;
  std::uint64_t seed = 1;
  double epoch_scale = 0.1;
  // Empty means "derive from the reference schedule times epoch_scale".
  numkit::Schedule phase1_schedule;
  numkit::Schedule gan_schedule;
  numkit::Schedule phase2_schedule;
  double lambda_p = 100.0;
  double d_lr_scale = 0.03;
  double momentum = 0.9;
};

struct PipelineConfig {
  DatasetSection dataset;
  ModelSection model;
  AugmentSection augment;
  TrainSection train;
  std::string output_dir = "out";
};

// Reference schedules in full-length epochs.
numkit::Schedule reference_phase1_schedule();
numkit::Schedule reference_gan_schedule();
numkit::Schedule reference_phase2_schedule();

// Explicit schedules are used verbatim; missing ones are derived.
numkit::Schedule effective_phase1_schedule(const PipelineConfig& c);
numkit::Schedule effective_gan_schedule(const PipelineConfig& c);
numkit::Schedule effective_phase2_schedule(const PipelineConfig& c);

// "8:2 | 4:2,3,1.6 | 2:2" (resolution:ratios per layer).
std::vector<detkit::LayerSpec> parse_layers(const std::string& text);
std::string format_layers(const std::vector<detkit::LayerSpec>& layers);

// Line-oriented "key = value" text with [section] headers; '#' starts a
// comment. Unknown sections or keys are errors. Throws ConfigError listing
// every problem found.
PipelineConfig parse_config_text(const std::string& text);
PipelineConfig parse_config(const std::filesystem::path& path);

// Throws ConfigError listing every violated invariant.
void validate(const PipelineConfig& c);

// Full config with every default filled in; parses back to an equal config.
std::string echo_config(const PipelineConfig& c);

// num_classes <= 0 falls back to the synthetic scene's class count.
detkit::DetectorConfig detector_config(const PipelineConfig& c, int num_classes = 0);
// The policy with its batch size tied to train.batch_size.
maskaug::AugmentPolicy augment_policy(const PipelineConfig& c);
// Scene parameters with the image size tied to model.input_size.
imageio::SceneConfig scene_config(const PipelineConfig& c);

}  // namespace fgaug::pipeline
