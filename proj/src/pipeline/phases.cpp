#include "fgaug/pipeline/phases.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fgaug/detkit/loss.hpp"
#include "fgaug/errors.hpp"
#include "fgaug/imageio/dataset.hpp"
#include "fgaug/imageio/pnm.hpp"
#include "fgaug/maskaug/baseline.hpp"
#include "fgaug/numkit/checkpoint.hpp"
#include "fgaug/sepgan/train.hpp"

namespace fgaug::pipeline {

namespace fs = std::filesystem;
using imageio::PairedSample;

namespace {

imageio::ClassTable class_table_for(const PipelineConfig& c, const fs::path& root) {
  if (!c.dataset.class_table.empty()) return imageio::ClassTable::load(c.dataset.class_table);
  if (fs::exists(root / "classes.txt")) return imageio::ClassTable::load(root / "classes.txt");
  throw DatasetError(root.string() + ": no class table (set dataset.class_table or add classes.txt)");
}

std::vector<PairedSample> load_roots(const PipelineConfig& c, const std::vector<std::string>& roots,
                                     std::vector<std::string>& names) {
  std::vector<PairedSample> out;
  for (const auto& r : roots) {
    const auto table = class_table_for(c, r);
    if (names.empty()) names = table.names();
    else if (names != table.names()) throw DatasetError(r + ": class table differs from the first root");
    auto part = imageio::load_pairs_dataset(r, table);
    for (auto& s : part) out.push_back(std::move(s));
  }
  return out;
}

std::vector<detkit::Box> normalized_boxes(const PairedSample& s) {
  std::vector<detkit::Box> out;
  const double w = s.image.width, h = s.image.height;
  for (const auto& b : s.boxes) out.push_back({b.xmin / w, b.ymin / h, b.xmax / w, b.ymax / h});
  return out;
}

std::vector<int> box_classes(const PairedSample& s) {
  std::vector<int> out;
  for (const auto& b : s.boxes) out.push_back(b.class_id);
  return out;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void say(const std::function<void(const std::string&)>& log, const std::string& msg) {
  if (log) log(msg);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void shuffle(std::vector<std::size_t>& order, numkit::Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
  }
}

RunReport base_report(const PipelineConfig& c, const std::string& command) {
  RunReport r;
  r.command = command;
  r.config_echo = echo_config(c);
  r.seed = c.train.seed;
  r.deviations = standard_deviations();
  return r;
}

}  // namespace

Datasets load_datasets(const PipelineConfig& c) {
  Datasets d;
  if (c.dataset.kind == "synthetic") {
    const auto scene = scene_config(c);
    d.train = imageio::make_synthetic_dataset(c.dataset.seed, scene, c.dataset.n_train);
    d.test = imageio::make_synthetic_dataset(numkit::mix_seed(c.dataset.seed, 0x7e57), scene, c.dataset.n_test);
    d.class_names = imageio::synthetic_class_names(scene);
  } else {
    d.train = load_roots(c, c.dataset.train_roots, d.class_names);
    d.test = load_roots(c, c.dataset.test_roots, d.class_names);
  }
  for (const auto* split : {&d.train, &d.test})
    for (const auto& s : *split) {
      if (s.image.width != c.model.input_size || s.image.height != c.model.input_size) {
        throw DatasetError(s.stem + ": image is " + std::to_string(s.image.width) + "x" +
                           std::to_string(s.image.height) + ", model expects " +
                           std::to_string(c.model.input_size));
      }
    }
  return d;
}

std::uint64_t stream_seed(const PipelineConfig& c, Stream s) {
  return numkit::mix_seed(c.train.seed, static_cast<std::uint64_t>(s));
}

std::vector<DetEpoch> train_detector(detkit::Detector& det, const std::vector<PairedSample>& samples,
                                     const DetTrainOptions& opts,
                                     const std::function<void(const DetEpoch&)>& on_epoch) {
  numkit::validate_schedule(opts.schedule, "detector schedule");
  if (opts.batch_size < 1) throw ConfigError("batch size must be >= 1");
  const int first = numkit::schedule_begin(opts.schedule), last = numkit::schedule_end(opts.schedule);
  if (last > first && samples.empty()) throw DatasetError("train_detector: empty dataset");
  if (opts.masks && opts.masks->size() != samples.size()) {
    throw ContractError("train_detector: one enhancement mask per sample required");
  }

  numkit::OptimizerConfig oc;
  oc.kind = numkit::OptimizerKind::Sgd;
  oc.momentum = opts.momentum;
  numkit::Optimizer opt(det.parameters(), oc);
  numkit::Rng rng(opts.seed);
  numkit::Rng enhance_rng(opts.enhance_seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = static_cast<std::size_t>(opts.batch_size);

  std::vector<DetEpoch> history;
  for (int epoch = first; epoch < last; ++epoch) {
    DetEpoch acc;
    acc.epoch = epoch;
    acc.lr = numkit::lr_at(opts.schedule, epoch);
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::vector<PairedSample> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(samples[order[k]]);

      if (opts.masks) {
        // Perturb with the supplied masks, then restore the ground-truth
        // masks so geometric augmentation and targets use true labels.
        std::vector<PairedSample> guided = batch;
        for (std::size_t i = 0; i < guided.size(); ++i) guided[i].mask = (*opts.masks)[order[start + i]];
        maskaug::AugmentPolicy p = opts.policy;
        p.batch_size = static_cast<int>(guided.size());
        p.n_min = std::min(p.n_min, p.batch_size);
        p.n_max = std::min(p.n_max, p.batch_size);
        auto eb = maskaug::enhance_batch(guided, p, enhance_rng);
        for (std::size_t i = 0; i < batch.size(); ++i) batch[i].image = std::move(eb.samples[i].image);
        if (eb.applied) {
          ++acc.enhanced_batches;
          acc.enhanced_images += eb.n;
        }
      }

      const double inv_b = 1.0 / static_cast<double>(batch.size());
      for (auto& s : batch) {
        PairedSample aug = maskaug::baseline_augment(s, rng);
        const auto gts = normalized_boxes(aug);
        const auto targets = detkit::build_targets(detkit::match_anchors(gts, det.priors()), gts,
                                                   box_classes(aug), det.priors());
        numkit::Graph g;
        auto out = det.forward({&g, true}, g.input(imageio::to_tensor(aug.image)));
        auto l = detkit::detection_loss(out.logits, out.offsets, targets);
        const double v = l.loss.value().data[0];
        if (!std::isfinite(v)) {
          throw NumericError("detector loss became non-finite in epoch " + std::to_string(epoch) +
                                 " (sample " + s.stem + ")",
                             epoch);
        }
        acc.loss += v;
        acc.cls += l.cls;
        acc.loc += l.loc;
        if (!l.no_matches) g.backward(numkit::scale(l.loss, inv_b));
      }
      opt.step(acc.lr);
    }
    const double n = static_cast<double>(samples.size());
    acc.loss /= n;
    acc.cls /= n;
    acc.loc /= n;
    history.push_back(acc);
    if (on_epoch) on_epoch(acc);
  }
  numkit::zero_grads(det.parameters());
  return history;
}

detkit::MapResult evaluate_detector(detkit::Detector& det, const std::vector<PairedSample>& samples,
                                    int num_classes) {
  if (samples.empty()) throw DatasetError("evaluation split is empty");
  std::vector<std::vector<detkit::Detection>> dets;
  std::vector<std::vector<detkit::GroundTruth>> gts;
  for (const auto& s : samples) {
    dets.push_back(det.detect(s.image));
    gts.push_back(detkit::to_ground_truth(s.boxes));
  }
  return detkit::eval_map(dets, gts, num_classes);
}

std::vector<std::string> inference_trace(detkit::Detector& det) {
  const auto n = static_cast<std::size_t>(det.config().input_size);
  numkit::Graph g;
  det.forward({&g, false}, g.input(numkit::Tensor({1, 3, n, n}, 0.5)));
  std::vector<std::string> out;
  for (auto k : g.op_trace()) out.push_back(numkit::op_name(k));
  return out;
}

std::vector<std::string> checkpoint_manifest(const fs::path& path) {
  std::vector<std::string> out;
  for (const auto& e : numkit::load_checkpoint(path)) out.push_back(e.name + " " + numkit::shape_str(e.tensor.shape));
  return out;
}

PhaseResult run_phase1(const PipelineConfig& c, const fs::path& out_dir,
                       const std::function<void(const std::string&)>& log) {
  Timer timer;
  validate(c);
  fs::create_directories(out_dir);
  const Datasets data = load_datasets(c);
  if (data.train.empty()) throw DatasetError("training split is empty");
  const int num_classes = static_cast<int>(data.class_names.size());

  detkit::Detector det(detector_config(c, num_classes), stream_seed(c, Stream::DetectorInit));
  sepgan::Generator gen({c.model.generator_depth, c.model.generator_width}, stream_seed(c, Stream::GeneratorInit));
  sepgan::Discriminator disc({}, stream_seed(c, Stream::DiscriminatorInit));

  PhaseResult res;
  res.report = base_report(c, "train-phase1");
  RunReport& rep = res.report;
  rep.class_names = data.class_names;

  DetTrainOptions opts;
  opts.schedule = effective_phase1_schedule(c);
  opts.batch_size = c.train.batch_size;
  opts.seed = stream_seed(c, Stream::Phase1Detector);
  opts.momentum = c.train.momentum;
  rep.fact("phase1_schedule", numkit::format_schedule(opts.schedule));
  rep.detector_epochs = train_detector(det, data.train, opts, [&](const DetEpoch& e) {
    say(log, "detector epoch " + std::to_string(e.epoch) + " loss " + fmt(e.loss));
  });

  sepgan::GanTrainConfig gc;
  gc.schedule = effective_gan_schedule(c);
  gc.batch_size = c.train.batch_size;
  gc.lambda_p = c.train.lambda_p;
  gc.d_lr_scale = c.train.d_lr_scale;
  gc.seed = stream_seed(c, Stream::Gan);
  rep.fact("gan_schedule", numkit::format_schedule(gc.schedule));
  const auto det_params = det.parameters();
  auto hist = sepgan::train_sepgan(gen, disc, data.train, det_params, gc, [&](const sepgan::EpochLosses& e) {
    say(log, "gan epoch " + std::to_string(e.epoch) + " d " + fmt(e.l_gan_d) + " g " + fmt(e.l_gan_g) +
                 " perceptual " + fmt(e.l_perceptual));
  });
  rep.gan_epochs = hist.epochs;
  rep.fact("detector_checksum_before_gan", hex64(hist.frozen_checksum_before));
  rep.fact("detector_checksum_after_gan", hex64(hist.frozen_checksum_after));

  res.detector_checkpoint = out_dir / "detector_phase1.ckpt";
  res.sepgan_checkpoint = out_dir / "sepgan.ckpt";
  numkit::save_checkpoint(res.detector_checkpoint, det_params);
  auto gan_params = gen.parameters();
  for (auto& p : disc.parameters()) gan_params.push_back(p);
  numkit::save_checkpoint(res.sepgan_checkpoint, gan_params);
  sepgan::write_loss_history(out_dir / "gan_loss.csv", hist);

  rep.fact("train_samples", std::to_string(data.train.size()));
  if (!data.test.empty()) {
    rep.fact("test_mask_iou", fmt(sepgan::mean_mask_iou(gen, data.test)));
    rep.map = evaluate_detector(det, data.test, num_classes);
  }
  rep.fact("sepgan_checksum", hex64(numkit::checksum(gan_params)));
  rep.fact("detector_checksum", hex64(numkit::checksum(det_params)));
  rep.wall_seconds = timer.seconds();
  write_report(out_dir, "phase1_report", rep);
  return res;
}

PhaseResult run_phase2(const PipelineConfig& c, const fs::path& detector_ckpt, const fs::path& sepgan_ckpt,
                       const fs::path& out_dir, const std::string& stem,
                       const std::function<void(const std::string&)>& log) {
  Timer timer;
  validate(c);
  fs::create_directories(out_dir);
  const Datasets data = load_datasets(c);
  if (data.train.empty()) throw DatasetError("training split is empty");
  const int num_classes = static_cast<int>(data.class_names.size());

  detkit::Detector det(detector_config(c, num_classes), stream_seed(c, Stream::DetectorInit));
  sepgan::Generator gen({c.model.generator_depth, c.model.generator_width}, stream_seed(c, Stream::GeneratorInit));
  sepgan::Discriminator disc({}, stream_seed(c, Stream::DiscriminatorInit));
  numkit::assign_checkpoint(numkit::load_checkpoint(detector_ckpt), det.parameters());
  auto gan_params = gen.parameters();
  for (auto& p : disc.parameters()) gan_params.push_back(p);
  numkit::assign_checkpoint(numkit::load_checkpoint(sepgan_ckpt), gan_params);
  const auto gan_before = numkit::checksum(gan_params);

  PhaseResult res;
  res.report = base_report(c, "train-phase2");
  RunReport& rep = res.report;
  rep.class_names = data.class_names;

  // The generator is frozen for the whole phase, so its masks are computed once.
  std::vector<imageio::BinaryMask> masks;
  for (const auto& s : data.train) masks.push_back(c.augment.use_gt_masks ? s.mask : sepgan::predict_mask(gen, s.image));

  DetTrainOptions opts;
  opts.schedule = effective_phase2_schedule(c);
  opts.batch_size = c.train.batch_size;
  opts.seed = stream_seed(c, Stream::Phase2Detector);
  opts.momentum = c.train.momentum;
  opts.masks = &masks;
  opts.policy = augment_policy(c);
  opts.enhance_seed = c.augment.policy.rng_seed != 0 ? c.augment.policy.rng_seed
                                                     : stream_seed(c, Stream::Phase2Enhance);
  rep.fact("phase2_schedule", numkit::format_schedule(opts.schedule));
  rep.fact("enhancement_masks", c.augment.use_gt_masks ? "ground truth" : "generator");
  rep.detector_epochs = train_detector(det, data.train, opts, [&](const DetEpoch& e) {
    say(log, "detector epoch " + std::to_string(e.epoch) + " loss " + fmt(e.loss) + " enhanced images " +
                 std::to_string(e.enhanced_images));
  });

  const auto gan_after = numkit::checksum(gan_params);
  rep.fact("sepgan_checksum_before", hex64(gan_before));
  rep.fact("sepgan_checksum_after", hex64(gan_after));
  if (gan_after != gan_before) throw ContractError("phase 2 modified the separation model");

  res.detector_checkpoint = out_dir / "detector_phase2.ckpt";
  res.sepgan_checkpoint = sepgan_ckpt;
  numkit::save_checkpoint(res.detector_checkpoint, det.parameters());
  if (!data.test.empty()) rep.map = evaluate_detector(det, data.test, num_classes);
  rep.fact("detector_checksum", hex64(numkit::checksum(det.parameters())));
  rep.wall_seconds = timer.seconds();
  write_report(out_dir, stem, rep);
  return res;
}

RunReport run_eval(const PipelineConfig& c, const fs::path& detector_ckpt, const std::string& split,
                   const fs::path& out_dir) {
  Timer timer;
  validate(c);
  if (split != "train" && split != "test") throw ConfigError("split must be train or test, got '" + split + "'");
  const Datasets data = load_datasets(c);
  const auto& samples = split == "train" ? data.train : data.test;
  const int num_classes = static_cast<int>(data.class_names.size());
  detkit::Detector det(detector_config(c, num_classes), stream_seed(c, Stream::DetectorInit));
  numkit::assign_checkpoint(numkit::load_checkpoint(detector_ckpt), det.parameters());

  RunReport rep = base_report(c, "eval");
  rep.class_names = data.class_names;
  rep.fact("split", split);
  rep.fact("images", std::to_string(samples.size()));
  rep.fact("detector_checksum", hex64(numkit::checksum(det.parameters())));
  rep.map = evaluate_detector(det, samples, num_classes);
  rep.wall_seconds = timer.seconds();
  write_report(out_dir, "eval_report", rep);
  return rep;
}

void run_augment(const PipelineConfig& c, const fs::path& in_dir, const fs::path& out_dir, std::uint64_t seed) {
  validate(c);
  const auto table = class_table_for(c, in_dir);
  const auto samples = imageio::load_pairs_dataset(in_dir, table);
  for (const char* sub : {"images", "masks", "annotations"}) fs::create_directories(out_dir / sub);
  if (fs::exists(in_dir / "classes.txt")) {
    fs::copy_file(in_dir / "classes.txt", out_dir / "classes.txt", fs::copy_options::overwrite_existing);
  }

  auto copy = [](const fs::path& from, const fs::path& to) {
    std::error_code ec;
    fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError(to.string(), "copy failed: " + ec.message());
  };

  const maskaug::AugmentPolicy policy = augment_policy(c);
  numkit::Rng rng(seed);
  std::ofstream prov(out_dir / "provenance.txt");
  if (!prov) throw IoError((out_dir / "provenance.txt").string(), "cannot open for writing");
  prov << "# stem batch mode n seed\n";
  const std::size_t bs = static_cast<std::size_t>(policy.batch_size);
  for (std::size_t start = 0, batch = 0; start < samples.size(); start += bs, ++batch) {
    const std::size_t end = std::min(samples.size(), start + bs);
    std::vector<PairedSample> chunk(samples.begin() + static_cast<std::ptrdiff_t>(start),
                                    samples.begin() + static_cast<std::ptrdiff_t>(end));
    maskaug::AugmentPolicy p = policy;
    p.batch_size = static_cast<int>(chunk.size());
    p.n_min = std::min(p.n_min, p.batch_size);
    p.n_max = std::min(p.n_max, p.batch_size);
    auto eb = maskaug::enhance_batch(chunk, p, rng);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const auto& stem = chunk[i].stem;
      const maskaug::Mode mode = eb.modes[i];
      if (mode == maskaug::Mode::None) copy(in_dir / "images" / (stem + ".ppm"), out_dir / "images" / (stem + ".ppm"));
      else imageio::save_image(eb.samples[i].image, out_dir / "images" / (stem + ".ppm"));
      copy(in_dir / "masks" / (stem + ".pgm"), out_dir / "masks" / (stem + ".pgm"));
      copy(in_dir / "annotations" / (stem + ".xml"), out_dir / "annotations" / (stem + ".xml"));
      prov << stem << " " << batch << " " << maskaug::mode_name(mode) << " " << (eb.applied ? eb.n : 0) << " "
           << seed << "\n";
    }
  }
  if (!prov) throw IoError((out_dir / "provenance.txt").string(), "write failed");
}

void run_generate(const PipelineConfig& c, const fs::path& out_dir, std::size_t count) {
  validate(c);
  const auto scene = scene_config(c);
  const auto samples = imageio::make_synthetic_dataset(c.dataset.seed, scene, count);
  const imageio::ClassTable table(imageio::synthetic_class_names(scene));
  imageio::write_pairs_dataset(out_dir, samples, table);
  table.save(out_dir / "classes.txt");
}

}  // namespace fgaug::pipeline
