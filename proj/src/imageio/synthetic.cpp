#include "fgaug/imageio/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fgaug/errors.hpp"
#include "fgaug/numkit/rng.hpp"

namespace fgaug::imageio {

using numkit::Rng;

const char* shape_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Rectangle: return "rectangle";
    case ShapeKind::Ellipse: return "ellipse";
    case ShapeKind::Triangle: return "triangle";
  }
  return "?";
}

ShapeKind parse_shape(const std::string& name) {
  if (name == "rectangle") return ShapeKind::Rectangle;
  if (name == "ellipse") return ShapeKind::Ellipse;
  if (name == "triangle") return ShapeKind::Triangle;
  throw ConfigError("unknown shape kind '" + name + "'");
}

void validate(const SceneConfig& c) {
  if (c.image_size < 16) throw ConfigError("image_size must be >= 16");
  if (c.min_objects < 1 || c.max_objects < c.min_objects) {
    throw ConfigError("object count range [" + std::to_string(c.min_objects) + ", " +
                      std::to_string(c.max_objects) + "] is empty or below 1");
  }
  if (c.shapes.empty()) throw ConfigError("shape kind list is empty");
  if (c.num_classes < 1) throw ConfigError("num_classes must be >= 1");
  if (!(c.min_object_frac > 0 && c.min_object_frac <= c.max_object_frac &&
        c.max_object_frac < 1)) {
    throw ConfigError("object size range is empty");
  }
}

std::vector<std::string> synthetic_class_names(const SceneConfig& config) {
  std::vector<std::string> names(static_cast<std::size_t>(config.num_classes));
  for (int c = 0; c < config.num_classes; ++c) {
    std::string n;
    for (std::size_t k = 0; k < config.shapes.size(); ++k) {
      if (static_cast<int>(k) % config.num_classes != c) continue;
      if (!n.empty()) n += "+";
      n += shape_name(config.shapes[k]);
    }
    names[static_cast<std::size_t>(c)] = n.empty() ? "class" + std::to_string(c) : n;
  }
  return names;
}

namespace {

// Bilinear value noise in [-1, 1] on a coarse lattice.
class ValueNoise {
 public:
  ValueNoise(int size, int cell, Rng& rng) : cell_(cell), n_(size / cell + 2) {
    lattice_.resize(static_cast<std::size_t>(n_) * n_);
    for (double& v : lattice_) v = rng.uniform(-1.0, 1.0);
  }

  double at(int x, int y) const {
    const double fx = (x + 0.5) / cell_, fy = (y + 0.5) / cell_;
    const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
    const double tx = fx - ix, ty = fy - iy;
    auto l = [&](int a, int b) { return lattice_[static_cast<std::size_t>(b) * n_ + a]; };
    const double top = l(ix, iy) * (1 - tx) + l(ix + 1, iy) * tx;
    const double bot = l(ix, iy + 1) * (1 - tx) + l(ix + 1, iy + 1) * tx;
    return top * (1 - ty) + bot * ty;
  }

 private:
  int cell_;
  int n_;
  std::vector<double> lattice_;
};

struct Placed {
  ShapeKind kind;
  double x0, y0, w, h;
  double apex;  // triangle apex x offset as a fraction of w
};

bool inside(const Placed& s, double px, double py) {
  switch (s.kind) {
    case ShapeKind::Rectangle:
      return px >= s.x0 && px < s.x0 + s.w && py >= s.y0 && py < s.y0 + s.h;
    case ShapeKind::Ellipse: {
      const double dx = (px - (s.x0 + s.w / 2)) / (s.w / 2);
      const double dy = (py - (s.y0 + s.h / 2)) / (s.h / 2);
      return dx * dx + dy * dy <= 1.0;
    }
    case ShapeKind::Triangle: {
      const std::array<double, 6> v{s.x0 + s.apex * s.w, s.y0, s.x0, s.y0 + s.h, s.x0 + s.w,
                                    s.y0 + s.h};
      auto edge = [&](int a, int b) {
        return (v[2 * b] - v[2 * a]) * (py - v[2 * a + 1]) -
               (v[2 * b + 1] - v[2 * a + 1]) * (px - v[2 * a]);
      };
      const double e0 = edge(0, 1), e1 = edge(1, 2), e2 = edge(2, 0);
      return (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
    }
  }
  return false;
}

double box_iou(const GTBox& a, const GTBox& b) {
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.width() * a.height() + b.width() * b.height() - inter);
}

}  // namespace

PairedSample gen_synthetic_scene(std::uint64_t seed, const SceneConfig& config) {
  validate(config);
  Rng rng(seed);
  const int S = config.image_size;
  PairedSample out;
  out.image = Image(S, S, 3);
  out.mask = BinaryMask(S, S, 0);

  std::array<double, 3> base{};
  for (double& b : base) b = rng.uniform(0.15, 0.85);
  ValueNoise bg(S, 8, rng);
  for (int y = 0; y < S; ++y)
    for (int x = 0; x < S; ++x) {
      const double n = 0.1 * bg.at(x, y);
      for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = std::clamp(base[c] + n, 0.0, 1.0);
    }

  const int count = static_cast<int>(rng.uniform_int(config.min_objects, config.max_objects));
  for (int k = 0; k < count; ++k) {
    Placed shape{};
    GTBox box;
    std::vector<std::pair<int, int>> pixels;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto kind_idx =
          rng.uniform_int(0, static_cast<std::int64_t>(config.shapes.size()) - 1);
      shape.kind = config.shapes[static_cast<std::size_t>(kind_idx)];
      shape.w = rng.uniform(config.min_object_frac, config.max_object_frac) * S;
      shape.h = rng.uniform(config.min_object_frac, config.max_object_frac) * S;
      shape.x0 = rng.uniform(0.0, S - shape.w);
      shape.y0 = rng.uniform(0.0, S - shape.h);
      shape.apex = rng.uniform(0.2, 0.8);
      box.class_id = static_cast<int>(kind_idx) % config.num_classes;

      pixels.clear();
      int xmin = S, ymin = S, xmax = -1, ymax = -1;
      for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x)
          if (inside(shape, x + 0.5, y + 0.5)) {
            pixels.emplace_back(x, y);
            xmin = std::min(xmin, x), xmax = std::max(xmax, x);
            ymin = std::min(ymin, y), ymax = std::max(ymax, y);
          }
      if (pixels.empty()) continue;
      box.xmin = xmin, box.ymin = ymin, box.xmax = xmax + 1, box.ymax = ymax + 1;
      const bool crowded = std::any_of(out.boxes.begin(), out.boxes.end(),
                                       [&](const GTBox& o) { return box_iou(o, box) > 0.2; });
      if (!crowded || attempt == 63) break;
    }
    if (pixels.empty()) continue;

    std::array<double, 3> color{};
    for (int attempt = 0; attempt < 32; ++attempt) {
      double dist = 0;
      for (int c = 0; c < 3; ++c) {
        color[c] = rng.uniform(0.1, 0.9);
        dist += std::abs(color[c] - base[c]);
      }
      if (dist >= 0.45) break;
    }
    ValueNoise tex(S, 4, rng);
    for (auto [x, y] : pixels) {
      const double n = 0.1 * tex.at(x, y);
      for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = std::clamp(color[c] + n, 0.0, 1.0);
      out.mask.at(x, y) = 1;
    }
    out.boxes.push_back(box);
  }
  return out;
}

}  // namespace fgaug::imageio
