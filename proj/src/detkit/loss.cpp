#include "fgaug/detkit/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fgaug/errors.hpp"

namespace fgaug::detkit {

using numkit::Tensor;
using numkit::Var;

DetectionTargets build_targets(const MatchResult& match, const std::vector<Box>& gts,
                               const std::vector<int>& gt_classes,
                               const std::vector<PriorBox>& priors) {
  if (gts.size() != gt_classes.size()) throw ContractError("build_targets: gts/classes size mismatch");
  if (match.assignment.size() != priors.size()) {
    throw ContractError("build_targets: match does not cover the priors");
  }
  DetectionTargets t;
  t.labels.assign(priors.size(), 0);
  t.offsets.assign(priors.size(), Offsets{0, 0, 0, 0});
  for (std::size_t p = 0; p < priors.size(); ++p) {
    const int g = match.assignment[p];
    if (g == MatchResult::kBackground) continue;
    t.labels[p] = gt_classes[static_cast<std::size_t>(g)] + 1;
    t.offsets[p] = encode_offsets(gts[static_cast<std::size_t>(g)], priors[p]);
  }
  return t;
}

double smooth_l1(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

namespace {

double smooth_l1_grad(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

DetectionLoss detection_loss(Var logits, Var offsets, const DetectionTargets& targets,
                             const LossOptions& opts) {
  const auto& ls = logits.shape();
  const auto& os = offsets.shape();
  if (ls.size() != 2 || os.size() != 2 || os[1] != 4 || ls[0] != os[0] || ls[1] < 2) {
    throw DimensionError("detection_loss: expected logits [P, C+1] and offsets [P, 4], got " +
                         numkit::shape_str(ls) + " and " + numkit::shape_str(os));
  }
  const std::size_t P = ls[0], K = ls[1];
  if (targets.labels.size() != P || targets.offsets.size() != P) {
    throw ContractError("detection_loss: prediction count " + std::to_string(P) +
                        " != target count " + std::to_string(targets.labels.size()));
  }

  // Softmax probabilities, computed stably.
  const auto& z = logits.value().data;
  std::vector<double> prob(P * K), lse(P);
  for (std::size_t p = 0; p < P; ++p) {
    const double* row = &z[p * K];
    const double m = *std::max_element(row, row + K);
    double s = 0;
    for (std::size_t k = 0; k < K; ++k) s += std::exp(row[k] - m);
    lse[p] = m + std::log(s);
    for (std::size_t k = 0; k < K; ++k) prob[p * K + k] = std::exp(row[k] - lse[p]);
  }

  std::vector<std::size_t> pos, neg;
  for (std::size_t p = 0; p < P; ++p) {
    const int lab = targets.labels[p];
    if (lab < 0 || static_cast<std::size_t>(lab) >= K) {
      throw ContractError("detection_loss: label " + std::to_string(lab) + " out of range");
    }
    (lab > 0 ? pos : neg).push_back(p);
  }

  // Hard negatives: highest background loss first, lower index on ties.
  const std::size_t n_neg =
      std::min(neg.size(), static_cast<std::size_t>(opts.neg_pos_ratio * pos.size()));
  std::stable_sort(neg.begin(), neg.end(), [&](std::size_t a, std::size_t b) {
    return lse[a] - z[a * K] > lse[b] - z[b * K];
  });
  neg.resize(n_neg);

  std::vector<std::size_t> cls_rows = pos;
  cls_rows.insert(cls_rows.end(), neg.begin(), neg.end());

  DetectionLoss out;
  out.num_matched = static_cast<int>(pos.size());
  numkit::Graph& g = *logits.graph;
  if (pos.empty()) {
    out.no_matches = true;
    const Var ins[] = {logits, offsets};
    out.loss = g.custom(ins, Tensor::scalar(0.0), nullptr);
    return out;
  }

  const double n = static_cast<double>(pos.size());
  double cls = 0, loc = 0;
  for (std::size_t p : cls_rows) cls += lse[p] - z[p * K + static_cast<std::size_t>(targets.labels[p])];
  const auto& o = offsets.value().data;
  for (std::size_t p : pos)
    for (std::size_t d = 0; d < 4; ++d) loc += smooth_l1(o[p * 4 + d] - targets.offsets[p][d]);
  out.cls = cls / n;
  out.loc = loc / n;

  const Var ins[] = {logits, offsets};
  out.loss = g.custom(
      ins, Tensor::scalar(out.cls + out.loc),
      [prob = std::move(prob), cls_rows = std::move(cls_rows), pos = std::move(pos), targets, K,
       n](numkit::Graph& gr, const numkit::Node& self) {
        const double up = self.grad[0] / n;
        if (gr.needs_grad(self.inputs[0])) {
          auto& gz = gr.grad_buffer(self.inputs[0]);
          for (std::size_t p : cls_rows) {
            for (std::size_t k = 0; k < K; ++k) gz[p * K + k] += up * prob[p * K + k];
            gz[p * K + static_cast<std::size_t>(targets.labels[p])] -= up;
          }
        }
        if (gr.needs_grad(self.inputs[1])) {
          const auto& o = gr.node(self.inputs[1]).value.data;
          auto& go = gr.grad_buffer(self.inputs[1]);
          for (std::size_t p : pos)
            for (std::size_t d = 0; d < 4; ++d)
              go[p * 4 + d] += up * smooth_l1_grad(o[p * 4 + d] - targets.offsets[p][d]);
        }
      });
  return out;
}

}  // namespace fgaug::detkit
