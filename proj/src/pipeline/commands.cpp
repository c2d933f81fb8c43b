#include "fgaug/pipeline/commands.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "fgaug/errors.hpp"
#include "fgaug/pipeline/phases.hpp"

namespace fgaug::pipeline {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericError*>(&e)) return kNumeric;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const DatasetError*>(&e) ||
      dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kIo;
  }
  return kValidation;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Foreground-aware data enhancement for small object detectors"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string in, out_dir = "", ckpt, gan_ckpt, split = "test";
  std::size_t count = 10;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "seed override");
  };

  auto* generate = app.add_subcommand("generate", "write a synthetic dataset");
  common(generate);
  generate->add_option("--out", out_dir, "output dataset root")->required();
  generate->add_option("-n,--count", count, "number of scenes");

  auto* augment = app.add_subcommand("augment", "apply foreground enhancement to a dataset");
  common(augment);
  augment->add_option("--in", in, "input dataset root")->required();
  augment->add_option("--out", out_dir, "output dataset root")->required();

  auto* phase1 = app.add_subcommand("train-phase1", "detector pre-training and separation model");
  common(phase1);
  phase1->add_option("--out", out_dir, "output directory (default: config output dir)");

  auto* phase2 = app.add_subcommand("train-phase2", "enhanced detector training");
  common(phase2);
  phase2->add_option("--in", in, "phase 1 output directory");
  phase2->add_option("--ckpt", ckpt, "detector checkpoint (default: <in>/detector_phase1.ckpt)");
  phase2->add_option("--gan-ckpt", gan_ckpt, "separation model checkpoint (default: <in>/sepgan.ckpt)");
  phase2->add_option("--out", out_dir, "output directory (default: config output dir)");

  auto* eval = app.add_subcommand("eval", "evaluate a detector checkpoint");
  common(eval);
  eval->add_option("--ckpt", ckpt, "detector checkpoint")->required();
  eval->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));
  eval->add_option("--out", out_dir, "report directory (default: config output dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    PipelineConfig c = parse_config(config_path);
    if (out_dir.empty()) out_dir = c.output_dir;
    auto log = [&out](const std::string& line) { out << line << std::endl; };

    if (generate->parsed()) {
      if (seed) c.dataset.seed = *seed;
      run_generate(c, out_dir, count);
      out << "wrote " << count << " scenes to " << out_dir << "\n";
    } else if (augment->parsed()) {
      const std::uint64_t s = seed ? *seed : (c.augment.policy.rng_seed ? c.augment.policy.rng_seed : c.train.seed);
      run_augment(c, in, out_dir, s);
      out << "augmented " << in << " into " << out_dir << "\n";
    } else if (phase1->parsed()) {
      if (seed) c.train.seed = *seed;
      auto res = run_phase1(c, out_dir, log);
      out << format_report(res.report);
    } else if (phase2->parsed()) {
      if (seed) c.train.seed = *seed;
      if (ckpt.empty() || gan_ckpt.empty()) {
        if (in.empty()) throw ConfigError("train-phase2 needs --in or both --ckpt and --gan-ckpt");
        if (ckpt.empty()) ckpt = (fs::path(in) / "detector_phase1.ckpt").string();
        if (gan_ckpt.empty()) gan_ckpt = (fs::path(in) / "sepgan.ckpt").string();
      }
      auto res = run_phase2(c, ckpt, gan_ckpt, out_dir, "phase2_report", log);
      out << format_report(res.report);
    } else if (eval->parsed()) {
      if (seed) c.train.seed = *seed;
      out << format_report(run_eval(c, ckpt, split, out_dir));
    }
  } catch (const NumericError& e) {
    err << "numeric abort (epoch " << e.epoch() << "): " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kOk;
}

}  // namespace fgaug::pipeline
