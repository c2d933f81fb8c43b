#include "fgaug/detkit/matching.hpp"

namespace fgaug::detkit {

MatchResult match_anchors(const std::vector<Box>& gts, const std::vector<PriorBox>& priors,
                          double pos_threshold) {
  const std::size_t G = gts.size(), P = priors.size();
  MatchResult r;
  r.assignment.assign(P, MatchResult::kBackground);
  r.overlap.assign(P, 0.0);
  r.best_prior.assign(G, -1);
  if (G == 0) return r;

  std::vector<double> overlaps(G * P);
  for (std::size_t p = 0; p < P; ++p) {
    const Box pb = priors[p].corners();
    for (std::size_t g = 0; g < G; ++g) overlaps[g * P + p] = iou(gts[g], pb);
  }

  // Threshold pass.
  for (std::size_t p = 0; p < P; ++p) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < G; ++g) {
      if (overlaps[g * P + p] > best_iou) {
        best_iou = overlaps[g * P + p];
        best = static_cast<int>(g);
      }
    }
    if (best_iou >= pos_threshold) {
      r.assignment[p] = best;
      r.overlap[p] = best_iou;
    }
  }

  // Greedy bipartite force-matching.
  std::vector<bool> gt_done(G, false), prior_taken(P, false);
  for (std::size_t round = 0; round < G && round < P; ++round) {
    int bg = -1, bp = -1;
    double best = -1.0;
    for (std::size_t g = 0; g < G; ++g) {
      if (gt_done[g]) continue;
      for (std::size_t p = 0; p < P; ++p) {
        if (prior_taken[p]) continue;
        if (overlaps[g * P + p] > best) {
          best = overlaps[g * P + p];
          bg = static_cast<int>(g);
          bp = static_cast<int>(p);
        }
      }
    }
    gt_done[static_cast<std::size_t>(bg)] = true;
    prior_taken[static_cast<std::size_t>(bp)] = true;
    r.best_prior[static_cast<std::size_t>(bg)] = bp;
    r.assignment[static_cast<std::size_t>(bp)] = bg;
    r.overlap[static_cast<std::size_t>(bp)] = best;
  }
  return r;
}

}  // namespace fgaug::detkit
