#include "fgaug/pipeline/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fgaug/errors.hpp"

namespace fgaug::pipeline {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  os << text;
  if (!os) throw IoError(path.string(), "write failed");
}

}  // namespace

const std::vector<std::string>& standard_deviations() {
  static const std::vector<std::string> list{
      "backbone: 6-conv toy pyramid instead of ResNet101",
      "prediction module: plain 3x3 conv head per scale",
      "anchor scales: linear in [scale_min, scale_max] across layers",
      "schedules: reference epochs multiplied by epoch_scale unless given explicitly",
      "gan: non-saturating generator loss, straight-through binarization, Adam, discriminator lr scaled by d_lr_scale",
      "generator input: per-image channel centering",
      "detector: He-uniform trunk init, per-image channel centering, SGD with momentum",
  };
  return list;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_report(const RunReport& r) {
  std::ostringstream os;
  os << "command: " << r.command << "\nseed: " << r.seed << "\n\n";
  os << "config:\n" << r.config_echo << "\n";
  os << "deviations:\n";
  for (const auto& d : r.deviations) os << "  - " << d << "\n";
  if (!r.facts.empty()) {
    os << "\nfacts:\n";
    for (const auto& [k, v] : r.facts) os << "  " << k << ": " << v << "\n";
  }
  if (!r.detector_epochs.empty()) {
    os << "\ndetector epochs:\n  epoch  lr        loss        cls         loc         enhanced(batches/images)\n";
    for (const auto& e : r.detector_epochs) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %5d  %-8.2g  %-10.6f  %-10.6f  %-10.6f  %d/%d\n", e.epoch, e.lr,
                    e.loss, e.cls, e.loc, e.enhanced_batches, e.enhanced_images);
      os << buf;
    }
  }
  if (!r.gan_epochs.empty()) {
    os << "\nseparation model epochs:\n  epoch  l_gan_d     l_gan_g     l_perceptual\n";
    for (const auto& e : r.gan_epochs) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %5d  %-10.6f  %-10.6f  %-10.6g\n", e.epoch, e.l_gan_d, e.l_gan_g,
                    e.l_perceptual);
      os << buf;
    }
  }
  if (r.map) os << "\n" << detkit::format_ap_table(*r.map, r.class_names, "test AP (%)");
  return os.str();
}

std::string format_report_csv(const RunReport& r) {
  std::ostringstream os;
  os << "section,key,value\n";
  os << "run,command," << r.command << "\nrun,seed," << r.seed << "\n";
  for (const auto& [k, v] : r.facts) os << "fact," << k << "," << v << "\n";
  for (const auto& e : r.detector_epochs) {
    const std::string p = "detector_epoch," + std::to_string(e.epoch) + ".";
    os << p << "lr," << num(e.lr) << "\n" << p << "loss," << num(e.loss) << "\n"
       << p << "cls," << num(e.cls) << "\n" << p << "loc," << num(e.loc) << "\n"
       << p << "enhanced_images," << e.enhanced_images << "\n";
  }
  for (const auto& e : r.gan_epochs) {
    const std::string p = "gan_epoch," + std::to_string(e.epoch) + ".";
    os << p << "l_gan_d," << num(e.l_gan_d) << "\n" << p << "l_gan_g," << num(e.l_gan_g) << "\n"
       << p << "l_perceptual," << num(e.l_perceptual) << "\n";
  }
  if (r.map) {
    for (std::size_t c = 0; c < r.map->ap.size(); ++c) {
      const std::string name = c < r.class_names.size() ? r.class_names[c] : std::to_string(c);
      os << "ap," << name << "," << (r.map->ap[c] ? num(*r.map->ap[c]) : "") << "\n";
    }
    os << "ap,mAP," << num(r.map->map) << "\n";
  }
  return os.str();
}

void write_report(const std::filesystem::path& dir, const std::string& stem, const RunReport& r) {
  std::filesystem::create_directories(dir);
  write_file(dir / (stem + ".txt"), format_report(r));
  write_file(dir / (stem + ".csv"), format_report_csv(r));
  write_file(dir / (stem + "_timing.txt"), "wall_seconds " + num(r.wall_seconds) + "\n");
}

}  // namespace fgaug::pipeline
