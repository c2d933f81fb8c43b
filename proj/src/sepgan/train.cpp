#include "fgaug/sepgan/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "fgaug/errors.hpp"
#include "fgaug/maskaug/mask_ops.hpp"
#include "fgaug/sepgan/losses.hpp"

namespace fgaug::sepgan {

using numkit::Binding;
using numkit::Graph;
using numkit::Var;

imageio::Image fake_crop(const imageio::Image& image, const numkit::Tensor& prob_map) {
  return maskaug::mask_multiply(image, maskaug::binarize(prob_map));
}

namespace {

void check_finite(double v, const char* what, int epoch) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + " became non-finite in epoch " + std::to_string(epoch),
                       epoch);
  }
}

}  // namespace

GanHistory train_sepgan(Generator& g, Discriminator& d,
                        const std::vector<imageio::PairedSample>& samples,
                        const std::vector<numkit::ParamRef>& frozen, const GanTrainConfig& cfg,
                        const std::function<void(const EpochLosses&)>& on_epoch) {
  numkit::validate_schedule(cfg.schedule, "gan schedule");
  if (cfg.batch_size < 1) throw ConfigError("gan batch size must be >= 1");
  GanHistory hist;
  hist.frozen_checksum_before = numkit::checksum(frozen);
  const int first = numkit::schedule_begin(cfg.schedule), last = numkit::schedule_end(cfg.schedule);
  if (last > first && samples.empty()) throw DatasetError("train_sepgan: empty dataset");

  numkit::Optimizer opt_g(g.parameters(), cfg.optimizer);
  numkit::Optimizer opt_d(d.parameters(), cfg.optimizer);
  numkit::Rng rng(cfg.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = first; epoch < last; ++epoch) {
    const double lr = numkit::lr_at(cfg.schedule, epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
    }
    EpochLosses acc;
    acc.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double inv_b = 1.0 / static_cast<double>(end - start);

      // Discriminator step: real crops from ground-truth masks, fake crops
      // from the binarized generator output. G is not on the tape.
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = samples[order[k]];
        const numkit::Tensor prob = g.predict(s.image);
        if (!numkit::all_finite(prob)) {
          throw NumericError("generator output became non-finite in epoch " + std::to_string(epoch) +
                                 " (sample " + s.stem + ")",
                             epoch);
        }
        const auto fake = fake_crop(s.image, prob);
        const auto real = maskaug::mask_multiply(s.image, s.mask);
        Graph gr;
        Binding bd{&gr, true};
        auto dr = d.forward(bd, gr.input(imageio::to_tensor(real)));
        auto df = d.forward(bd, gr.input(imageio::to_tensor(fake)));
        Var loss = discriminator_loss(dr.score, df.score);
        check_finite(loss.value().data[0], "discriminator loss", epoch);
        acc.l_gan_d += loss.value().data[0];
        gr.backward(numkit::scale(loss, inv_b));
      }
      opt_d.step(lr * cfg.d_lr_scale);

      // Generator step with D frozen. Binarization is straight-through.
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = samples[order[k]];
        const auto real = maskaug::mask_multiply(s.image, s.mask);
        Graph gr;
        Binding bg{&gr, true}, frozen_d{&gr, false};
        Var img = gr.input(imageio::to_tensor(s.image));
        Var m = numkit::straight_through_binarize(g.forward(bg, img), 0.5);
        Var m3 = numkit::concat_channels(numkit::concat_channels(m, m), m);
        auto df = d.forward(frozen_d, numkit::mul(img, m3));
        auto dr = d.forward(frozen_d, gr.input(imageio::to_tensor(real)));
        Var lg = generator_adversarial_loss(df.score);
        Var lp = perceptual_loss(df.features, dr.features);
        Var total = numkit::add(lg, numkit::scale(lp, cfg.lambda_p));
        check_finite(total.value().data[0], "generator loss", epoch);
        acc.l_gan_g += lg.value().data[0];
        acc.l_perceptual += lp.value().data[0];
        gr.backward(numkit::scale(total, inv_b));
      }
      opt_g.step(lr);
    }
    const double n = static_cast<double>(samples.size());
    acc.l_gan_d /= n;
    acc.l_gan_g /= n;
    acc.l_perceptual /= n;
    acc.total_g = acc.l_gan_g + cfg.lambda_p * acc.l_perceptual;
    hist.epochs.push_back(acc);
    if (on_epoch) on_epoch(acc);
  }
  // Leave no stale gradients behind on either network.
  numkit::zero_grads(g.parameters());
  numkit::zero_grads(d.parameters());

  hist.frozen_checksum_after = numkit::checksum(frozen);
  if (hist.frozen_checksum_after != hist.frozen_checksum_before) {
    throw ContractError("train_sepgan: frozen parameters changed during GAN training");
  }
  return hist;
}

void write_loss_history(const std::filesystem::path& path, const GanHistory& h) {
  std::ofstream os(path);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  os << "epoch,l_gan_d,l_gan_g,l_perceptual\n";
  char buf[160];
  for (const auto& e : h.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", e.epoch, e.l_gan_d, e.l_gan_g, e.l_perceptual);
    os << buf;
  }
  if (!os) throw IoError(path.string(), "write failed");
}

double mean_mask_iou(Generator& g, const std::vector<imageio::PairedSample>& samples) {
  if (samples.empty()) return 0.0;
  double total = 0;
  for (const auto& s : samples) total += imageio::mask_iou(predict_mask(g, s.image), s.mask);
  return total / static_cast<double>(samples.size());
}

}  // namespace fgaug::sepgan
