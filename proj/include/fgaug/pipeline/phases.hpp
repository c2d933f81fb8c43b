#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fgaug/detkit/detector.hpp"
#include "fgaug/imageio/image.hpp"
#include "fgaug/maskaug/policy.hpp"
#include "fgaug/pipeline/config.hpp"
#include "fgaug/pipeline/report.hpp"
#include "fgaug/sepgan/networks.hpp"

namespace fgaug::pipeline {

struct Datasets {
  std::vector<imageio::PairedSample> train;
  std::vector<imageio::PairedSample> test;
  std::vector<std::string> class_names;
};

// Synthetic: generated from dataset.seed (test scenes from a separate
// stream). Pairs: roots loaded and concatenated in the listed order.
Datasets load_datasets(const PipelineConfig& c);

// Random streams derived from train.seed.
enum class Stream : std::uint64_t {
  DetectorInit = 1,
  GeneratorInit = 2,
  DiscriminatorInit = 3,
  Phase1Detector = 10,
  Gan = 11,
  Phase2Detector = 12,
  Phase2Enhance = 13,
};
std::uint64_t stream_seed(const PipelineConfig& c, Stream s);

struct DetTrainOptions {
  numkit::Schedule schedule;
  int batch_size = 8;
  std::uint64_t seed = 0;  // shuffling and baseline augmentation
  double momentum = 0.9;
  // Mask-guided enhancement; off when `masks` is null.
  const std::vector<imageio::BinaryMask>* masks = nullptr;
  maskaug::AugmentPolicy policy;
  std::uint64_t enhance_seed = 0;
};

// Minibatch SGD over the schedule. Every image gets baseline augmentation;
// with enhancement on, each batch first goes through enhance_batch using
// the supplied masks, drawing from its own random stream so that a policy
// with batch_prob 0 reproduces plain training exactly.
std::vector<DetEpoch> train_detector(detkit::Detector& det,
                                     const std::vector<imageio::PairedSample>& samples,
                                     const DetTrainOptions& opts,
                                     const std::function<void(const DetEpoch&)>& on_epoch = {});

detkit::MapResult evaluate_detector(detkit::Detector& det,
                                    const std::vector<imageio::PairedSample>& samples,
                                    int num_classes);

// Op sequence of one inference forward pass (weights do not matter).
std::vector<std::string> inference_trace(detkit::Detector& det);
// "name shape" per checkpoint entry, in file order.
std::vector<std::string> checkpoint_manifest(const std::filesystem::path& path);

struct PhaseResult {
  RunReport report;
  std::filesystem::path detector_checkpoint;
  std::filesystem::path sepgan_checkpoint;
};

// Detector pre-training with baseline augmentation, then separation-model
// training with the detector frozen. Writes detector_phase1.ckpt,
// sepgan.ckpt, gan_loss.csv and phase1_report.* into out_dir.
PhaseResult run_phase1(const PipelineConfig& c, const std::filesystem::path& out_dir,
                       const std::function<void(const std::string&)>& log = {});

// Continues detector training from the phase-1 checkpoint on enhanced
// batches; the separation model is loaded and stays frozen. Writes
// detector_phase2.ckpt and <stem>.* into out_dir.
PhaseResult run_phase2(const PipelineConfig& c, const std::filesystem::path& detector_ckpt,
                       const std::filesystem::path& sepgan_ckpt, const std::filesystem::path& out_dir,
                       const std::string& stem = "phase2_report",
                       const std::function<void(const std::string&)>& log = {});

// split: "train" or "test". Writes eval_report.* into out_dir.
RunReport run_eval(const PipelineConfig& c, const std::filesystem::path& detector_ckpt,
                   const std::string& split, const std::filesystem::path& out_dir);

// Perturbs the dataset at in_dir batch by batch with its ground-truth masks
// and writes it to out_dir with a provenance.txt sidecar. Files of samples
// that were not perturbed are copied byte for byte.
void run_augment(const PipelineConfig& c, const std::filesystem::path& in_dir,
                 const std::filesystem::path& out_dir, std::uint64_t seed);

// Writes `count` synthetic scenes (and classes.txt) to out_dir.
void run_generate(const PipelineConfig& c, const std::filesystem::path& out_dir, std::size_t count);

}  // namespace fgaug::pipeline
