#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgaug/imageio/image.hpp"

namespace fgaug::imageio {

enum class ShapeKind { Rectangle, Ellipse, Triangle };

const char* shape_name(ShapeKind kind);
ShapeKind parse_shape(const std::string& name);

struct SceneConfig {
  int image_size = 64;
  int min_objects = 1;
  int max_objects = 3;
  std::vector<ShapeKind> shapes{ShapeKind::Rectangle, ShapeKind::Ellipse, ShapeKind::Triangle};
  int num_classes = 3;
  // Object side length as a fraction of the image side.
  double min_object_frac = 0.18;
  double max_object_frac = 0.42;
};

void validate(const SceneConfig& config);

// Filled shapes on a value-noise background. Class id is the index of the
// shape kind in config.shapes modulo num_classes. Pure function of
// (seed, config).
PairedSample gen_synthetic_scene(std::uint64_t seed, const SceneConfig& config);

// Class names for the synthetic generator, one per class id.
std::vector<std::string> synthetic_class_names(const SceneConfig& config);

}  // namespace fgaug::imageio
