#pragma once

#include <vector>

#include "fgaug/detkit/boxes.hpp"
#include "fgaug/detkit/matching.hpp"
#include "fgaug/numkit/graph.hpp"

namespace fgaug::detkit {

struct DetectionTargets {
  std::vector<int> labels;  // per prior: 0 background, class_id + 1 otherwise
  std::vector<Offsets> offsets;  // encoded targets, meaningful where labels > 0
};

DetectionTargets build_targets(const MatchResult& match, const std::vector<Box>& gts,
                               const std::vector<int>& gt_classes,
                               const std::vector<PriorBox>& priors);

struct LossOptions {
  double neg_pos_ratio = 3.0;
};

struct DetectionLoss {
  numkit::Var loss;  // scalar: (cls + loc) / N_matched
  double cls = 0;
  double loc = 0;
  int num_matched = 0;
  bool no_matches = false;  // set when the loss is forced to 0
};

// logits: [P, C+1], offsets: [P, 4]. Softmax cross-entropy over matched
// priors plus the hardest background priors (neg_pos_ratio per match), and
// smooth-L1 on matched offsets.
DetectionLoss detection_loss(numkit::Var logits, numkit::Var offsets,
                             const DetectionTargets& targets, const LossOptions& opts = {});

double smooth_l1(double x);

}  // namespace fgaug::detkit
