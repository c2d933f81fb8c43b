#pragma once

#include <vector>

#include "fgaug/detkit/boxes.hpp"

namespace fgaug::detkit {

struct MatchResult {
  static constexpr int kBackground = -1;
  std::vector<int> assignment;  // per prior: gt index or kBackground
  std::vector<int> best_prior;  // per gt: its force-matched prior
  std::vector<double> overlap;  // per prior: IoU with the assigned gt (0 for background)
};

// Force-matching runs as a greedy bipartite pass: repeatedly take the
// highest-IoU (gt, prior) pair among unmatched gts and unclaimed priors,
// ties to the lower gt index and then the lower prior index. Every other
// prior whose best IoU reaches pos_threshold takes its argmax gt (lower
// index on ties).
MatchResult match_anchors(const std::vector<Box>& gts, const std::vector<PriorBox>& priors,
                          double pos_threshold = 0.5);

}  // namespace fgaug::detkit
