#include "fgaug/detkit/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "fgaug/errors.hpp"

namespace fgaug::detkit {

double voc07_ap(const std::vector<bool>& ranked_tp, std::size_t num_positives) {
  if (num_positives == 0) return 0.0;
  std::vector<double> prec, rec;
  std::size_t tp = 0, fp = 0;
  for (bool t : ranked_tp) {
    (t ? tp : fp) += 1;
    prec.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    rec.push_back(static_cast<double>(tp) / static_cast<double>(num_positives));
  }
  double ap = 0;
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    double p = 0;
    for (std::size_t k = 0; k < rec.size(); ++k)
      if (rec[k] >= t) p = std::max(p, prec[k]);
    ap += p / 11.0;
  }
  return ap;
}

namespace {

struct Ranked {
  std::size_t image;
  const Detection* det;
};

bool ranked_before(const Ranked& a, const Ranked& b) {
  if (a.det->confidence != b.det->confidence) return a.det->confidence > b.det->confidence;
  const Box& x = a.det->box;
  const Box& y = b.det->box;
  return std::tie(a.image, x.xmin, x.ymin, x.xmax, x.ymax) <
         std::tie(b.image, y.xmin, y.ymin, y.xmax, y.ymax);
}

}  // namespace

MapResult eval_map(const std::vector<std::vector<Detection>>& dets,
                   const std::vector<std::vector<GroundTruth>>& gts, int num_classes,
                   double iou_threshold) {
  if (dets.size() != gts.size()) {
    throw ContractError("eval_map: " + std::to_string(dets.size()) + " detection lists for " +
                        std::to_string(gts.size()) + " images");
  }
  MapResult r;
  r.ap.resize(static_cast<std::size_t>(num_classes));
  double total = 0;
  int defined = 0;
  for (int c = 0; c < num_classes; ++c) {
    std::size_t npos = 0;
    std::vector<std::vector<bool>> claimed(gts.size());
    for (std::size_t i = 0; i < gts.size(); ++i) {
      claimed[i].assign(gts[i].size(), false);
      for (const auto& g : gts[i])
        if (g.class_id == c && !g.difficult) ++npos;
    }
    if (npos == 0) {
      r.notes.push_back("class " + std::to_string(c) + " has no ground truth; excluded from mAP");
      continue;
    }
    std::vector<Ranked> ranked;
    for (std::size_t i = 0; i < dets.size(); ++i)
      for (const auto& d : dets[i])
        if (d.class_id == c) ranked.push_back({i, &d});
    std::sort(ranked.begin(), ranked.end(), ranked_before);

    std::vector<bool> tp;
    for (const auto& rk : ranked) {
      const auto& g = gts[rk.image];
      double best = -1;
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (g[j].class_id != c) continue;
        const double o = iou(rk.det->box, g[j].box);
        if (o > best) {
          best = o;
          best_j = j;
        }
      }
      if (best > iou_threshold) {
        if (g[best_j].difficult) continue;
        if (!claimed[rk.image][best_j]) {
          claimed[rk.image][best_j] = true;
          tp.push_back(true);
        } else {
          tp.push_back(false);
        }
      } else {
        tp.push_back(false);
      }
    }
    const double ap = voc07_ap(tp, npos);
    r.ap[static_cast<std::size_t>(c)] = ap;
    total += ap;
    ++defined;
  }
  r.map = defined > 0 ? total / defined : 0.0;
  return r;
}

std::vector<GroundTruth> to_ground_truth(const std::vector<imageio::GTBox>& boxes) {
  std::vector<GroundTruth> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back({{b.xmin, b.ymin, b.xmax, b.ymax}, b.class_id, b.difficult});
  return out;
}

namespace {

std::string fmt(double v, int prec) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string class_label(const std::vector<std::string>& names, std::size_t c) {
  return c < names.size() ? names[c] : "class" + std::to_string(c);
}

}  // namespace

std::string format_ap_table(const MapResult& r, const std::vector<std::string>& class_names,
                            const std::string& title) {
  std::ostringstream os;
  os << title << "\n";
  std::size_t w = 5;
  for (std::size_t c = 0; c < r.ap.size(); ++c) w = std::max(w, class_label(class_names, c).size());
  auto row = [&](const std::string& name, const std::string& value) {
    os << "  " << name << std::string(w - name.size() + 2, ' ') << value << "\n";
  };
  for (std::size_t c = 0; c < r.ap.size(); ++c) {
    row(class_label(class_names, c), r.ap[c] ? fmt(*r.ap[c] * 100.0, 1) : "n/a");
  }
  row("mAP", fmt(r.map * 100.0, 1));
  for (const auto& n : r.notes) os << "  note: " << n << "\n";
  return os.str();
}

std::string format_ap_csv(const MapResult& r, const std::vector<std::string>& class_names) {
  std::ostringstream os;
  os << "class,ap\n";
  for (std::size_t c = 0; c < r.ap.size(); ++c) {
    os << class_label(class_names, c) << "," << (r.ap[c] ? fmt(*r.ap[c], 6) : "") << "\n";
  }
  os << "mAP," << fmt(r.map, 6) << "\n";
  return os.str();
}

void write_detections_csv(const std::filesystem::path& path, const std::vector<Detection>& dets) {
  std::ofstream os(path);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  for (const auto& d : dets) {
    os << d.class_id << "," << fmt(d.confidence, 6) << "," << fmt(d.box.xmin, 3) << ","
       << fmt(d.box.ymin, 3) << "," << fmt(d.box.xmax, 3) << "," << fmt(d.box.ymax, 3) << "\n";
  }
  if (!os) throw IoError(path.string(), "write failed");
}

}  // namespace fgaug::detkit
