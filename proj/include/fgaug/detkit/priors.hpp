#pragma once

#include <vector>

#include "fgaug/detkit/boxes.hpp"

namespace fgaug::detkit {

struct LayerSpec {
  int resolution = 1;               // grid side length
  double scale = 0.1;               // anchor base size as a fraction of the image
  std::vector<double> aspect_ratios;  // each r adds boxes at r and 1/r
};

// Scales linearly spaced over [min_scale, max_scale] in spec order.
void assign_linear_scales(std::vector<LayerSpec>& specs, double min_scale = 0.1,
                          double max_scale = 0.9);

// The six-layer pyramid used with 321x321 inputs.
std::vector<LayerSpec> table_pyramid_specs();

// Three-scale pyramid (8, 4, 2) for 64x64 inputs.
std::vector<LayerSpec> desk_pyramid_specs(double min_scale = 0.1, double max_scale = 0.9);

int boxes_per_cell(const LayerSpec& spec);
std::size_t prior_count(const std::vector<LayerSpec>& specs);

// Per cell, in order: scale s at ratio 1, scale sqrt(s * s_next) at ratio 1,
// then (r, 1/r) for each listed ratio. Cells are row-major and layers are
// concatenated in spec order. The last layer uses s_next = 1.
std::vector<PriorBox> gen_prior_boxes(const std::vector<LayerSpec>& specs);

}  // namespace fgaug::detkit
