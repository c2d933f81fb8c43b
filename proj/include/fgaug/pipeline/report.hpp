#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fgaug/detkit/eval.hpp"
#include "fgaug/sepgan/train.hpp"

namespace fgaug::pipeline {

struct DetEpoch {
  int epoch = 0;
  double lr = 0;
  double loss = 0;  // mean per-image detection loss
  double cls = 0;
  double loc = 0;
  int enhanced_batches = 0;
  int enhanced_images = 0;
};

struct RunReport {
  std::string command;
  std::string config_echo;
  std::uint64_t seed = 0;
  std::vector<std::string> deviations;
  std::vector<std::pair<std::string, std::string>> facts;  // checksums, artifact paths, counts
  std::vector<DetEpoch> detector_epochs;
  std::vector<sepgan::EpochLosses> gan_epochs;
  std::optional<detkit::MapResult> map;
  std::vector<std::string> class_names;
  double wall_seconds = 0;  // kept out of the report files so they stay reproducible

  void fact(const std::string& key, const std::string& value) { facts.emplace_back(key, value); }
};

// Substitutions made for desk-scale runs; echoed into every report.
const std::vector<std::string>& standard_deviations();

std::string format_report(const RunReport& r);
std::string format_report_csv(const RunReport& r);

// Writes <stem>.txt and <stem>.csv, plus <stem>_timing.txt holding the
// wall-clock time.
void write_report(const std::filesystem::path& dir, const std::string& stem, const RunReport& r);

std::string hex64(std::uint64_t v);

}  // namespace fgaug::pipeline
