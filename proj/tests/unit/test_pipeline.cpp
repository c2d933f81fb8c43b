#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fgaug/detkit/loss.hpp"
#include "fgaug/detkit/matching.hpp"
#include "fgaug/detkit/nms.hpp"
#include "fgaug/errors.hpp"
#include "fgaug/imageio/dataset.hpp"
#include "fgaug/imageio/pnm.hpp"
#include "fgaug/imageio/voc.hpp"
#include "fgaug/numkit/checkpoint.hpp"
#include "fgaug/pipeline/commands.hpp"
#include "fgaug/pipeline/phases.hpp"

using namespace fgaug;
using namespace fgaug::pipeline;
namespace fs = std::filesystem;

namespace {

const char* kTiny = R"(
[dataset]
kind = synthetic
seed = 3
n_train = 6
n_test = 3

[model]
input_size = 32
layers = 4:2 | 2:2
width = 4
generator_width = 4

[augment]
n_max = 3

[train]
batch_size = 4
seed = 5
phase1_schedule = 0-1:1e-2
gan_schedule = 1-2:1e-3
phase2_schedule = 2-3:1e-3
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fgaug_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_same_tree(const fs::path& a, const fs::path& b) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    if (rel.filename().string().find("_timing") != std::string::npos) continue;
    INFO(rel.string());
    REQUIRE(fs::exists(b / rel));
    CHECK(slurp(e.path()) == slurp(b / rel));
    ++n;
  }
  CHECK(n > 0);
}

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fgaug");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace

TEST_CASE("minimal config fills defaults and echoes them") {
  const auto c = parse_config_text("[train]\nseed = 9\n");
  CHECK(c.train.seed == 9);
  CHECK(c.train.batch_size == 8);
  CHECK(c.model.input_size == 64);
  const auto echo = echo_config(c);
  CHECK(echo.find("batch_size = 8") != std::string::npos);
  CHECK(echo.find("seed = 9") != std::string::npos);
  // The echo is itself a config that parses back to the same echo.
  CHECK(echo_config(parse_config_text(echo)) == echo);
}

TEST_CASE("validation errors") {
  CHECK(config_error("[train]\nbatch_size = 0\n").find("batch_size") != std::string::npos);
  CHECK(config_error("[train]\nbatch_sise = 4\n").find("batch_sise") != std::string::npos);
  CHECK(config_error("[train]\nphase1_schedule = 0-12:1e-3, 10-16:1e-4\n").find("overlap") != std::string::npos);
  CHECK(config_error("[model]\ninput_size = 60\n") != "");

  // Every violated invariant is listed, not just the first.
  const auto both = config_error("[train]\nbatch_size = 0\nphase1_schedule = 0-12:1e-3, 10-16:1e-4\n");
  CHECK(both.find("batch_size") != std::string::npos);
  CHECK(both.find("overlap") != std::string::npos);
}

TEST_CASE("scaled reference schedule is accepted and echoed verbatim") {
  const auto c = parse_config_text("[train]\nphase1_schedule = 0-12:1e-3, 12-16:1e-4, 16-20:1e-5\n");
  const numkit::Schedule want{{0, 12, 1e-3}, {12, 16, 1e-4}, {16, 20, 1e-5}};
  REQUIRE(c.train.phase1_schedule.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(c.train.phase1_schedule[i].begin == want[i].begin);
    CHECK(c.train.phase1_schedule[i].end == want[i].end);
    CHECK(c.train.phase1_schedule[i].lr == want[i].lr);
  }
  CHECK(echo_config(c).find("phase1_schedule = " + numkit::format_schedule(want)) != std::string::npos);
  // Derived schedules: reference epochs times epoch_scale.
  const auto d = parse_config_text("");
  CHECK(numkit::format_schedule(effective_phase1_schedule(d)) == numkit::format_schedule(want));
}

TEST_CASE("zero-epoch phase 1 writes the initial weights") {
  auto c = parse_config_text(std::string(kTiny) + "epoch_scale = 0.001\n");
  c.train.phase1_schedule.clear();
  c.train.gan_schedule.clear();
  const auto out = scratch("zero");
  auto res = run_phase1(c, out);
  CHECK(res.report.detector_epochs.empty());
  CHECK(res.report.gan_epochs.empty());

  detkit::Detector det(detector_config(c, 3), stream_seed(c, Stream::DetectorInit));
  sepgan::Generator gen({c.model.generator_depth, c.model.generator_width}, stream_seed(c, Stream::GeneratorInit));
  const auto dir2 = scratch("zero_ref");
  numkit::save_checkpoint(dir2 / "det.ckpt", det.parameters());
  CHECK(slurp(out / "detector_phase1.ckpt") == slurp(dir2 / "det.ckpt"));

  sepgan::Generator loaded({c.model.generator_depth, c.model.generator_width}, 999);
  numkit::assign_checkpoint(numkit::load_checkpoint(out / "sepgan.ckpt"), loaded.parameters());
  CHECK(numkit::checksum(loaded.parameters()) == numkit::checksum(gen.parameters()));
}

TEST_CASE("phase 1 and phase 2 are deterministic") {
  const auto c = parse_config_text(kTiny);
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto ra = run_phase1(c, a);
  auto rb = run_phase1(c, b);
  run_phase2(c, ra.detector_checkpoint, ra.sepgan_checkpoint, a);
  run_phase2(c, rb.detector_checkpoint, rb.sepgan_checkpoint, b);
  check_same_tree(a, b);
  CHECK(fs::exists(a / "phase1_report.txt"));
  CHECK(fs::exists(a / "phase1_report.csv"));
  CHECK(fs::exists(a / "phase2_report.csv"));
  CHECK(fs::exists(a / "gan_loss.csv"));
}

TEST_CASE("phase 2 with enhancement off equals plain continued training") {
  auto c = parse_config_text(kTiny);
  const auto dir = scratch("off");
  auto p1 = run_phase1(c, dir);
  c.augment.policy.batch_prob = 0.0;
  auto p2 = run_phase2(c, p1.detector_checkpoint, p1.sepgan_checkpoint, dir);

  const auto data = load_datasets(c);
  detkit::Detector det(detector_config(c, 3), 1);
  numkit::assign_checkpoint(numkit::load_checkpoint(p1.detector_checkpoint), det.parameters());
  DetTrainOptions o;
  o.schedule = effective_phase2_schedule(c);
  o.batch_size = c.train.batch_size;
  o.seed = stream_seed(c, Stream::Phase2Detector);
  o.momentum = c.train.momentum;
  const auto control = train_detector(det, data.train, o);

  REQUIRE(control.size() == p2.report.detector_epochs.size());
  for (std::size_t i = 0; i < control.size(); ++i) {
    CHECK(control[i].loss == p2.report.detector_epochs[i].loss);
    CHECK(p2.report.detector_epochs[i].enhanced_images == 0);
  }
  numkit::save_checkpoint(dir / "control.ckpt", det.parameters());
  CHECK(slurp(dir / "control.ckpt") == slurp(p2.detector_checkpoint));
}

TEST_CASE("phase 2 leaves the separation model untouched and enhances batches") {
  auto c = parse_config_text(kTiny);
  c.augment.policy.batch_prob = 1.0;
  const auto dir = scratch("frozen");
  auto p1 = run_phase1(c, dir);
  const auto before = slurp(p1.sepgan_checkpoint);
  auto p2 = run_phase2(c, p1.detector_checkpoint, p1.sepgan_checkpoint, dir);
  CHECK(slurp(p1.sepgan_checkpoint) == before);
  std::string b, a;
  for (const auto& [k, v] : p2.report.facts) {
    if (k == "sepgan_checksum_before") b = v;
    if (k == "sepgan_checksum_after") a = v;
  }
  CHECK(!b.empty());
  CHECK(a == b);
  REQUIRE(!p2.report.detector_epochs.empty());
  CHECK(p2.report.detector_epochs[0].enhanced_batches == 2);

  // Phase 1 never enhances.
  for (const auto& e : p1.report.detector_epochs) CHECK(e.enhanced_images == 0);
}

TEST_CASE("phase 2 rejects a checkpoint of a different shape") {
  auto c = parse_config_text(kTiny);
  const auto dir = scratch("mismatch");
  auto p1 = run_phase1(c, dir);
  c.model.width = 6;
  CHECK_THROWS_AS(run_phase2(c, p1.detector_checkpoint, p1.sepgan_checkpoint, dir), LoadError);
}

TEST_CASE("evaluation of decoded ground truth gives mAP 1") {
  const auto c = parse_config_text(kTiny);
  const auto data = load_datasets(c);
  detkit::Detector det(detector_config(c, 3), 1);
  std::vector<std::vector<detkit::Detection>> dets;
  std::vector<std::vector<detkit::GroundTruth>> gts;
  const double s = c.model.input_size;
  for (const auto& sample : data.test) {
    std::vector<detkit::Box> boxes;
    std::vector<int> classes;
    for (const auto& b : sample.boxes) {
      boxes.push_back({b.xmin / s, b.ymin / s, b.xmax / s, b.ymax / s});
      classes.push_back(b.class_id);
    }
    const auto t = detkit::build_targets(detkit::match_anchors(boxes, det.priors()), boxes, classes, det.priors());
    std::vector<detkit::Detection> cand;
    for (std::size_t p = 0; p < t.labels.size(); ++p) {
      if (t.labels[p] == 0) continue;
      const auto box = detkit::decode_offsets(t.offsets[p], det.priors()[p]);
      cand.push_back({{box.xmin * s, box.ymin * s, box.xmax * s, box.ymax * s}, t.labels[p] - 1, 1.0});
    }
    std::vector<detkit::Detection> kept;
    for (auto i : detkit::nms(cand, 0.45, true)) kept.push_back(cand[i]);
    dets.push_back(kept);
    gts.push_back(detkit::to_ground_truth(sample.boxes));
  }
  CHECK(detkit::eval_map(dets, gts, 3).map == doctest::Approx(1.0));
}

TEST_CASE("eval is repeatable and rejects an empty split") {
  auto c = parse_config_text(kTiny);
  const auto dir = scratch("eval");
  detkit::Detector det(detector_config(c, 3), 4);
  numkit::save_checkpoint(dir / "det.ckpt", det.parameters());
  const auto r1 = run_eval(c, dir / "det.ckpt", "test", dir / "a");
  const auto r2 = run_eval(c, dir / "det.ckpt", "test", dir / "b");
  CHECK(format_report(r1) == format_report(r2));
  CHECK(slurp(dir / "a" / "eval_report.csv") == slurp(dir / "b" / "eval_report.csv"));
  REQUIRE(r1.map);
  CHECK(r1.map->map >= 0.0);
  CHECK(r1.map->map <= 1.0);
  c.dataset.n_test = 0;
  CHECK_THROWS_AS(run_eval(c, dir / "det.ckpt", "test", dir / "c"), DatasetError);
}

TEST_CASE("generate writes exactly n triples") {
  const auto c = parse_config_text(kTiny);
  const auto dir = scratch("gen");
  run_generate(c, dir, 10);
  auto count = [&](const char* sub) {
    return std::distance(fs::directory_iterator(dir / sub), fs::directory_iterator{});
  };
  CHECK(count("images") == 10);
  CHECK(count("masks") == 10);
  CHECK(count("annotations") == 10);
  const auto back = imageio::load_pairs_dataset(dir, imageio::ClassTable::load(dir / "classes.txt"));
  CHECK(back.size() == 10);
}

TEST_CASE("augment command") {
  auto c = parse_config_text(kTiny);
  const auto in = scratch("aug_in");
  run_generate(c, in, 10);

  SUBCASE("batch_prob 0 copies bytes") {
    c.augment.policy.batch_prob = 0.0;
    const auto out = scratch("aug_off");
    run_augment(c, in, out, 17);
    for (const auto& sub : {"images", "masks", "annotations"}) {
      for (const auto& e : fs::directory_iterator(in / sub)) {
        CHECK(slurp(e.path()) == slurp(out / sub / e.path().filename()));
      }
    }
    CHECK(fs::exists(out / "provenance.txt"));
  }

  SUBCASE("fixed seed is repeatable and perturbs foregrounds") {
    c.augment.policy.batch_prob = 1.0;
    const auto a = scratch("aug_a"), b = scratch("aug_b");
    run_augment(c, in, a, 17);
    run_augment(c, in, b, 17);
    check_same_tree(a, b);
    int changed = 0;
    for (const auto& e : fs::directory_iterator(in / "images")) {
      if (slurp(e.path()) != slurp(a / "images" / e.path().filename())) ++changed;
    }
    CHECK(changed > 0);
    const auto out = imageio::load_pairs_dataset(a, imageio::ClassTable::load(a / "classes.txt"));
    const auto orig = imageio::load_pairs_dataset(in, imageio::ClassTable::load(in / "classes.txt"));
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (int y = 0; y < out[i].image.height; ++y)
        for (int x = 0; x < out[i].image.width; ++x) {
          if (orig[i].mask.at(x, y)) continue;
          for (int ch = 0; ch < 3; ++ch) REQUIRE(out[i].image.at(x, y, ch) == orig[i].image.at(x, y, ch));
        }
    }
  }
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("cli");
  {
    std::ofstream(dir / "ok.ini") << kTiny;
    std::ofstream(dir / "bad.ini") << "[train]\nbatch_size = 0\n";
  }
  const auto ok = (dir / "ok.ini").string();
  CHECK(cli({"generate", "--config", ok, "--out", (dir / "gen").string(), "-n", "3"}) == kOk);
  CHECK(cli({"generate", "--config", (dir / "bad.ini").string(), "--out", (dir / "x").string()}) == kValidation);
  CHECK(cli({"frobnicate"}) == kValidation);
  CHECK(cli({"eval", "--config", ok, "--ckpt", (dir / "missing.ckpt").string(), "--out", dir.string()}) == kIo);
  CHECK(cli({"augment", "--config", ok, "--in", (dir / "nowhere").string(), "--out", (dir / "o").string()}) == kIo);
  CHECK(exit_code_for(NumericError("loss", 3)) == kNumeric);
  CHECK(exit_code_for(LoadError("shape")) == kValidation);
}
