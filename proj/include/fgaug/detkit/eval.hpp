#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fgaug/detkit/boxes.hpp"
#include "fgaug/imageio/image.hpp"

namespace fgaug::detkit {

struct GroundTruth {
  Box box;
  int class_id = 0;
  bool difficult = false;
};

struct MapResult {
  std::vector<std::optional<double>> ap;  // per class; empty when no GT
  double map = 0;
  std::vector<std::string> notes;
};

// VOC2007 11-point interpolated AP. Detections are ranked by confidence with
// a canonical tie order (image, then box coordinates), so the result does
// not depend on input order. A detection is a true positive when its best
// same-class IoU exceeds iou_threshold and that GT is still unclaimed;
// matches to difficult GTs are ignored.
MapResult eval_map(const std::vector<std::vector<Detection>>& dets,
                   const std::vector<std::vector<GroundTruth>>& gts, int num_classes,
                   double iou_threshold = 0.5);

// 11-point AP from a ranked TP/FP sequence.
double voc07_ap(const std::vector<bool>& ranked_tp, std::size_t num_positives);

std::vector<GroundTruth> to_ground_truth(const std::vector<imageio::GTBox>& boxes);

std::string format_ap_table(const MapResult& r, const std::vector<std::string>& class_names,
                            const std::string& title);
std::string format_ap_csv(const MapResult& r, const std::vector<std::string>& class_names);

// class_id, confidence, xmin, ymin, xmax, ymax per line.
void write_detections_csv(const std::filesystem::path& path, const std::vector<Detection>& dets);

}  // namespace fgaug::detkit
