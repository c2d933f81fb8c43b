#pragma once

// Reference implementations for detection primitives, written independently
// of the library code they check (shared by unit and acceptance tests).

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "fgaug/detkit/boxes.hpp"
#include "fgaug/detkit/matching.hpp"
#include "fgaug/detkit/priors.hpp"
#include "fgaug/numkit/rng.hpp"

namespace fgaug::testing {

using detkit::Box;
using detkit::Detection;
using detkit::LayerSpec;
using detkit::MatchResult;
using detkit::PriorBox;
using detkit::iou;
using numkit::Rng;

// Rasterized overlap: count sample points of a fine grid inside each box.
inline double raster_iou(const Box& a, const Box& b, double cell) {
  const double x0 = std::min(a.xmin, b.xmin), y0 = std::min(a.ymin, b.ymin);
  const double x1 = std::max(a.xmax, b.xmax), y1 = std::max(a.ymax, b.ymax);
  long inter = 0, uni = 0;
  for (double y = y0 + cell / 2; y < y1; y += cell)
    for (double x = x0 + cell / 2; x < x1; x += cell) {
      const bool ia = x >= a.xmin && x < a.xmax && y >= a.ymin && y < a.ymax;
      const bool ib = x >= b.xmin && x < b.xmax && y >= b.ymin && y < b.ymax;
      inter += ia && ib;
      uni += ia || ib;
    }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

inline Box random_box(Rng& rng, double lo = 0.0, double hi = 1.0) {
  double a = rng.uniform(lo, hi), b = rng.uniform(lo, hi), c = rng.uniform(lo, hi),
         d = rng.uniform(lo, hi);
  if (a > b) std::swap(a, b);
  if (c > d) std::swap(c, d);
  return {a, c, b + 1e-3, d + 1e-3};
}

// Direct enumeration: one box per (cell, kind) with independent arithmetic.
inline std::size_t enumerate_priors(const std::vector<LayerSpec>& specs) {
  std::size_t n = 0;
  for (const auto& s : specs)
    for (int y = 0; y < s.resolution; ++y)
      for (int x = 0; x < s.resolution; ++x) {
        n += 2;
        for (std::size_t r = 0; r < s.aspect_ratios.size(); ++r) n += 2;
      }
  return n;
}

// Brute-force matcher: enumerate the force-match pairs by repeatedly
// scanning every remaining (gt, prior) pair, then apply the threshold rule.
inline MatchResult brute_force_match(const std::vector<Box>& gts, const std::vector<PriorBox>& priors,
                              double thr) {
  MatchResult r;
  r.assignment.assign(priors.size(), MatchResult::kBackground);
  r.overlap.assign(priors.size(), 0.0);
  r.best_prior.assign(gts.size(), -1);
  for (std::size_t p = 0; p < priors.size(); ++p) {
    double best = 0;
    int arg = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      double o = iou(gts[g], priors[p].corners());
      if (arg < 0 || o > best) {
        best = o;
        arg = int(g);
      }
    }
    if (arg >= 0 && best >= thr) {
      r.assignment[p] = arg;
      r.overlap[p] = best;
    }
  }
  std::vector<int> used_g, used_p;
  for (std::size_t round = 0; round < gts.size(); ++round) {
    double best = -1;
    int bg = -1, bp = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (std::count(used_g.begin(), used_g.end(), int(g))) continue;
      for (std::size_t p = 0; p < priors.size(); ++p) {
        if (std::count(used_p.begin(), used_p.end(), int(p))) continue;
        double o = iou(gts[g], priors[p].corners());
        if (o > best) {
          best = o;
          bg = int(g);
          bp = int(p);
        }
      }
    }
    used_g.push_back(bg);
    used_p.push_back(bp);
    r.best_prior[bg] = bp;
    r.assignment[bp] = bg;
    r.overlap[bp] = best;
  }
  return r;
}

// Exhaustive-pairwise NMS: a box survives iff no higher-ranked survivor of
// the same class overlaps it. Ranks computed by counting, not sorting.
inline std::vector<std::size_t> reference_nms(const std::vector<Detection>& d, double thr) {
  const std::size_t n = d.size();
  auto higher = [&](std::size_t a, std::size_t b) {
    return d[a].confidence > d[b].confidence || (d[a].confidence == d[b].confidence && a < b);
  };
  std::vector<std::size_t> rank(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (higher(j, i)) ++rank[i];
  std::vector<std::size_t> by_rank(n);
  for (std::size_t i = 0; i < n; ++i) by_rank[rank[i]] = i;
  std::vector<bool> alive(n, false);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t i = by_rank[r];
    bool ok = true;
    for (std::size_t j = 0; j < n; ++j)
      if (alive[j] && d[j].class_id == d[i].class_id && iou(d[i].box, d[j].box) > thr) ok = false;
    alive[i] = ok;
  }
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < n; ++r)
    if (alive[by_rank[r]]) out.push_back(by_rank[r]);
  return out;
}

// 11-point AP by direct summation over recall levels.
inline double direct_11pt(const std::vector<std::pair<double, double>>& pr_points) {
  double s = 0;
  for (int i = 0; i <= 10; ++i) {
    double best = 0;
    for (auto [p, r] : pr_points)
      if (r >= i / 10.0) best = std::max(best, p);
    s += best;
  }
  return s / 11.0;
}

}  // namespace fgaug::testing
