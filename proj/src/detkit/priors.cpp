#include "fgaug/detkit/priors.hpp"

#include <cmath>

#include "fgaug/errors.hpp"

namespace fgaug::detkit {

void assign_linear_scales(std::vector<LayerSpec>& specs, double min_scale, double max_scale) {
  const std::size_t n = specs.size();
  for (std::size_t i = 0; i < n; ++i) {
    specs[i].scale = n == 1 ? min_scale
                            : min_scale + (max_scale - min_scale) * static_cast<double>(i) /
                                              static_cast<double>(n - 1);
  }
}

std::vector<LayerSpec> table_pyramid_specs() {
  std::vector<LayerSpec> specs{
      {41, 0, {2}},           {21, 0, {2, 3, 1.6}}, {11, 0, {2, 3, 1.6}},
      {6, 0, {2, 3, 1.6}},    {3, 0, {2}},          {2, 0, {2}},
  };
  assign_linear_scales(specs);
  return specs;
}

std::vector<LayerSpec> desk_pyramid_specs(double min_scale, double max_scale) {
  std::vector<LayerSpec> specs{{8, 0, {2}}, {4, 0, {2, 3, 1.6}}, {2, 0, {2}}};
  assign_linear_scales(specs, min_scale, max_scale);
  return specs;
}

int boxes_per_cell(const LayerSpec& spec) {
  return 2 + 2 * static_cast<int>(spec.aspect_ratios.size());
}

std::size_t prior_count(const std::vector<LayerSpec>& specs) {
  std::size_t n = 0;
  for (const auto& s : specs) {
    n += static_cast<std::size_t>(s.resolution) * s.resolution * boxes_per_cell(s);
  }
  return n;
}

std::vector<PriorBox> gen_prior_boxes(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw ConfigError("gen_prior_boxes: no layer specs");
  std::vector<PriorBox> out;
  out.reserve(prior_count(specs));
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const LayerSpec& s = specs[k];
    if (s.resolution < 1) throw ConfigError("layer resolution must be >= 1");
    if (!(s.scale > 0.0 && s.scale <= 1.0)) throw ConfigError("layer scale must lie in (0,1]");
    for (std::size_t a = 0; a < s.aspect_ratios.size(); ++a) {
      if (!(s.aspect_ratios[a] > 0.0)) throw ConfigError("aspect ratio must be positive");
      for (std::size_t b = 0; b < a; ++b) {
        if (s.aspect_ratios[a] == s.aspect_ratios[b]) throw ConfigError("aspect ratios must be distinct");
      }
    }
    const double next = k + 1 < specs.size() ? specs[k + 1].scale : 1.0;
    const double extra = std::sqrt(s.scale * next);
    const double step = 1.0 / s.resolution;
    for (int y = 0; y < s.resolution; ++y)
      for (int x = 0; x < s.resolution; ++x) {
        const double cx = (x + 0.5) * step, cy = (y + 0.5) * step;
        out.push_back({cx, cy, s.scale, s.scale});
        out.push_back({cx, cy, extra, extra});
        for (double r : s.aspect_ratios) {
          const double sr = std::sqrt(r);
          out.push_back({cx, cy, s.scale * sr, s.scale / sr});
          out.push_back({cx, cy, s.scale / sr, s.scale * sr});
        }
      }
  }
  return out;
}

}  // namespace fgaug::detkit
