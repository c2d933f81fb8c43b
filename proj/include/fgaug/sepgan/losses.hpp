#pragma once

#include <span>
#include <vector>

#include "fgaug/numkit/graph.hpp"

namespace fgaug::sepgan {

inline constexpr double kScoreEps = 1e-7;

struct GanLoss {
  double value_d = 0;  // mean log d_real + mean log(1 - d_fake)
  double loss_d = 0;   // -value_d
  double loss_g = 0;   // -mean log d_fake
};

// Scores are clamped to [eps, 1 - eps] first.
GanLoss gan_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake);

// Sum over layers of ||a_i - b_i||_2 / numel(a_i).
double perceptual_loss(const std::vector<numkit::Tensor>& a, const std::vector<numkit::Tensor>& b);

// Graph forms for one real/fake pair.
numkit::Var discriminator_loss(numkit::Var d_real, numkit::Var d_fake);
numkit::Var generator_adversarial_loss(numkit::Var d_fake);
numkit::Var perceptual_loss(std::span<const numkit::Var> a, std::span<const numkit::Var> b);

}  // namespace fgaug::sepgan
