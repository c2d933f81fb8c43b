#include "fgaug/sepgan/losses.hpp"

#include <algorithm>
#include <cmath>

#include "fgaug/errors.hpp"

namespace fgaug::sepgan {

using numkit::Tensor;
using numkit::Var;

namespace {

double clamp_score(double s) { return std::clamp(s, kScoreEps, 1.0 - kScoreEps); }

Var ones_like(Var x) { return x.graph->input(Tensor(x.shape(), 1.0)); }

}  // namespace

GanLoss gan_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake) {
  if (d_real.empty() || d_fake.empty()) throw ContractError("gan_loss: empty score sequence");
  double lr = 0, lf = 0, lg = 0;
  for (double s : d_real) lr += std::log(clamp_score(s));
  for (double s : d_fake) {
    lf += std::log(1.0 - clamp_score(s));
    lg += std::log(clamp_score(s));
  }
  GanLoss out;
  out.value_d = lr / d_real.size() + lf / d_fake.size();
  out.loss_d = -out.value_d;
  out.loss_g = -lg / d_fake.size();
  return out;
}

double perceptual_loss(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  if (a.size() != b.size()) throw ContractError("perceptual_loss: layer count mismatch");
  double total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].shape != b[i].shape) {
      throw ContractError("perceptual_loss: layer " + std::to_string(i) + " shapes " +
                          numkit::shape_str(a[i].shape) + " vs " + numkit::shape_str(b[i].shape));
    }
    double s = 0;
    for (std::size_t k = 0; k < a[i].numel(); ++k) s += (a[i].data[k] - b[i].data[k]) * (a[i].data[k] - b[i].data[k]);
    total += std::sqrt(s) / static_cast<double>(a[i].numel());
  }
  return total;
}

Var discriminator_loss(Var d_real, Var d_fake) {
  Var r = numkit::clamp(d_real, kScoreEps, 1.0 - kScoreEps);
  Var f = numkit::clamp(d_fake, kScoreEps, 1.0 - kScoreEps);
  Var value = numkit::add(numkit::mean(numkit::log(r)),
                          numkit::mean(numkit::log(numkit::sub(ones_like(f), f))));
  return numkit::scale(value, -1.0);
}

Var generator_adversarial_loss(Var d_fake) {
  return numkit::scale(numkit::mean(numkit::log(numkit::clamp(d_fake, kScoreEps, 1.0 - kScoreEps))), -1.0);
}

Var perceptual_loss(std::span<const Var> a, std::span<const Var> b) {
  if (a.empty() || a.size() != b.size()) throw ContractError("perceptual_loss: layer count mismatch");
  Var total;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].shape() != b[i].shape()) {
      throw ContractError("perceptual_loss: layer " + std::to_string(i) + " shape mismatch");
    }
    Var term = numkit::scale(numkit::l2_norm(numkit::sub(a[i], b[i])),
                             1.0 / static_cast<double>(a[i].numel()));
    total = i == 0 ? term : numkit::add(total, term);
  }
  return total;
}

}  // namespace fgaug::sepgan
