#include "fgaug/pipeline/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fgaug/errors.hpp"

namespace fgaug::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  double d = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return d;
}

long long to_int(const std::string& v) {
  std::size_t used = 0;
  long long i = std::stoll(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return i;
}

std::uint64_t to_u64(const std::string& v) {
  if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
  std::size_t used = 0;
  unsigned long long i = std::stoull(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return i;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false");
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

struct Field {
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

// section -> ordered (key, field) list
using Registry = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Field>>>>;

template <typename T, typename Parse, typename Format>
Field field(T& ref, Parse parse, Format format) {
  return {[&ref, parse](const std::string& v) { ref = static_cast<T>(parse(v)); },
          [&ref, format] { return format(ref); }};
}

Field int_field(int& r) {
  return field(r, to_int, [](int v) { return std::to_string(v); });
}
Field size_field(std::size_t& r) {
  return field(r, to_u64, [](std::size_t v) { return std::to_string(v); });
}
Field u64_field(std::uint64_t& r) {
  return field(r, to_u64, [](std::uint64_t v) { return std::to_string(v); });
}
Field double_field(double& r) { return field(r, to_double, fmt_double); }
Field bool_field(bool& r) {
  return field(r, to_bool, [](bool v) { return std::string(v ? "true" : "false"); });
}
Field string_field(std::string& r) {
  return {[&r](const std::string& v) { r = v; }, [&r] { return r; }};
}
Field list_field(std::vector<std::string>& r) {
  return {[&r](const std::string& v) { r = split(v, ','); }, [&r] { return join(r, ", "); }};
}
Field schedule_field(numkit::Schedule& r) {
  return {[&r](const std::string& v) { r = numkit::parse_schedule(v); },
          [&r] { return numkit::format_schedule(r); }};
}

Registry registry(PipelineConfig& c) {
  auto& d = c.dataset;
  auto& m = c.model;
  auto& p = c.augment.policy;
  auto& t = c.train;
  Registry r;
  r.push_back({"dataset",
               {{"kind", string_field(d.kind)},
                {"train_roots", list_field(d.train_roots)},
                {"test_roots", list_field(d.test_roots)},
                {"class_table", string_field(d.class_table)},
                {"seed", u64_field(d.seed)},
                {"n_train", size_field(d.n_train)},
                {"n_test", size_field(d.n_test)},
                {"min_objects", int_field(d.scene.min_objects)},
                {"max_objects", int_field(d.scene.max_objects)},
                {"num_classes", int_field(d.scene.num_classes)},
                {"min_object_frac", double_field(d.scene.min_object_frac)},
                {"max_object_frac", double_field(d.scene.max_object_frac)},
                {"shapes",
                 {[&d](const std::string& v) {
                    d.scene.shapes.clear();
                    for (const auto& s : split(v, ',')) d.scene.shapes.push_back(imageio::parse_shape(s));
                  },
                  [&d] {
                    std::vector<std::string> names;
                    for (auto k : d.scene.shapes) names.push_back(imageio::shape_name(k));
                    return join(names, ", ");
                  }}}}});
  r.push_back({"model",
               {{"input_size", int_field(m.input_size)},
                {"layers",
                 {[&m](const std::string& v) { m.layers = parse_layers(v); },
                  [&m] { return format_layers(m.layers); }}},
                {"scale_min", double_field(m.scale_min)},
                {"scale_max", double_field(m.scale_max)},
                {"width", int_field(m.width)},
                {"fusion",
                 {[&m](const std::string& v) {
                    if (v == "add") m.fusion = detkit::Fusion::Add;
                    else if (v == "mul") m.fusion = detkit::Fusion::Mul;
                    else throw std::invalid_argument("expected add or mul");
                  },
                  [&m] { return std::string(m.fusion == detkit::Fusion::Add ? "add" : "mul"); }}},
                {"generator_depth", int_field(m.generator_depth)},
                {"generator_width", int_field(m.generator_width)}}});
  r.push_back({"augment",
               {{"batch_prob", double_field(p.batch_prob)},
                {"n_min", int_field(p.n_min)},
                {"n_max", int_field(p.n_max)},
                {"mode_weights",
                 {[&p](const std::string& v) {
                    auto parts = split(v, ',');
                    if (parts.size() != 3) throw std::invalid_argument("expected three weights");
                    for (int i = 0; i < 3; ++i) p.mode_weights[i] = to_double(parts[i]);
                  },
                  [&p] {
                    return fmt_double(p.mode_weights[0]) + ", " + fmt_double(p.mode_weights[1]) +
                           ", " + fmt_double(p.mode_weights[2]);
                  }}},
                {"salt_density", double_field(p.salt_density)},
                {"contrast_alpha_min", double_field(p.contrast_alpha_min)},
                {"contrast_alpha_max", double_field(p.contrast_alpha_max)},
                {"seed", u64_field(p.rng_seed)},
                {"use_gt_masks", bool_field(c.augment.use_gt_masks)}}});
  r.push_back({"train",
               {{"batch_size", int_field(t.batch_size)},
                {"seed", u64_field(t.seed)},
                {"epoch_scale", double_field(t.epoch_scale)},
                {"phase1_schedule", schedule_field(t.phase1_schedule)},
                {"gan_schedule", schedule_field(t.gan_schedule)},
                {"phase2_schedule", schedule_field(t.phase2_schedule)},
                {"lambda_p", double_field(t.lambda_p)},
                {"d_lr_scale", double_field(t.d_lr_scale)},
                {"momentum", double_field(t.momentum)}}});
  r.push_back({"output", {{"dir", string_field(c.output_dir)}}});
  return r;
}

}  // namespace

numkit::Schedule reference_phase1_schedule() {
  return {{0, 120, 1e-3}, {120, 160, 1e-4}, {160, 200, 1e-5}};
}
numkit::Schedule reference_gan_schedule() { return {{200, 220, 1e-3}}; }
numkit::Schedule reference_phase2_schedule() { return {{220, 240, 1e-4}}; }

numkit::Schedule effective_phase1_schedule(const PipelineConfig& c) {
  return c.train.phase1_schedule.empty()
             ? numkit::scale_schedule(reference_phase1_schedule(), c.train.epoch_scale)
             : c.train.phase1_schedule;
}
numkit::Schedule effective_gan_schedule(const PipelineConfig& c) {
  return c.train.gan_schedule.empty()
             ? numkit::scale_schedule(reference_gan_schedule(), c.train.epoch_scale)
             : c.train.gan_schedule;
}
numkit::Schedule effective_phase2_schedule(const PipelineConfig& c) {
  return c.train.phase2_schedule.empty()
             ? numkit::scale_schedule(reference_phase2_schedule(), c.train.epoch_scale)
             : c.train.phase2_schedule;
}

std::vector<detkit::LayerSpec> parse_layers(const std::string& text) {
  std::vector<detkit::LayerSpec> out;
  for (const auto& part : split(text, '|')) {
    const auto colon = part.find(':');
    detkit::LayerSpec spec;
    try {
      spec.resolution = static_cast<int>(to_int(trim(part.substr(0, colon))));
      if (colon != std::string::npos)
        for (const auto& r : split(part.substr(colon + 1), ',')) spec.aspect_ratios.push_back(to_double(r));
    } catch (const std::exception&) {
      throw ConfigError("malformed layer spec '" + part + "' (expected resolution:ratio,ratio)");
    }
    out.push_back(spec);
  }
  return out;
}

std::string format_layers(const std::vector<detkit::LayerSpec>& layers) {
  std::vector<std::string> parts;
  for (const auto& l : layers) {
    std::vector<std::string> ratios;
    for (double r : l.aspect_ratios) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", r);
      ratios.push_back(buf);
    }
    parts.push_back(std::to_string(l.resolution) + ":" + join(ratios, ","));
  }
  return join(parts, " | ");
}

PipelineConfig parse_config_text(const std::string& text) {
  PipelineConfig c;
  Registry reg = registry(c);
  std::vector<std::string> errs;
  std::string section;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errs.push_back(where + "malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (auto& [name, _] : reg) known |= name == section;
      if (!known) errs.push_back(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errs.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (section.empty()) {
      errs.push_back(where + "key '" + key + "' outside any section");
      continue;
    }
    Field* f = nullptr;
    for (auto& [name, fields] : reg)
      if (name == section)
        for (auto& [k, fld] : fields)
          if (k == key) f = &fld;
    if (!f) {
      errs.push_back(where + "unknown key '" + key + "' in [" + section + "]");
      continue;
    }
    if (seen[section + "." + key]++) errs.push_back(where + "duplicate key '" + key + "'");
    try {
      f->set(value);
    } catch (const std::exception& e) {
      errs.push_back(where + "bad value '" + value + "' for " + section + "." + key + " (" + e.what() + ")");
    }
  }
  if (!errs.empty()) throw ConfigError(join(errs, "\n"));
  validate(c);
  return c;
}

PipelineConfig parse_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path.string(), "cannot open config");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

void validate(const PipelineConfig& c) {
  std::vector<std::string> errs;
  auto check = [&errs](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  const auto& d = c.dataset;
  check(d.kind == "synthetic" || d.kind == "pairs", "dataset.kind must be synthetic or pairs");
  if (d.kind == "pairs") {
    check(!d.train_roots.empty(), "dataset.train_roots is required for pairs datasets");
  }
  if (d.kind == "synthetic") {
    check(d.n_train >= 1, "dataset.n_train must be >= 1");
    imageio::SceneConfig scene = d.scene;
    scene.image_size = c.model.input_size;
    try {
      imageio::validate(scene);
    } catch (const ConfigError& e) {
      errs.push_back(std::string("dataset: ") + e.what());
    }
  }
  const auto& m = c.model;
  check(m.input_size >= 8, "model.input_size must be >= 8");
  check(m.width >= 1, "model.width must be >= 1");
  check(m.generator_depth >= 1, "model.generator_depth must be >= 1");
  check(m.generator_width >= 1, "model.generator_width must be >= 1");
  check(m.scale_min > 0 && m.scale_min <= m.scale_max && m.scale_max <= 1,
        "model scales must satisfy 0 < scale_min <= scale_max <= 1");
  check(!m.layers.empty(), "model.layers must list at least one layer");
  if (m.generator_depth >= 1 && m.generator_depth < 20) {
    const int mult = 1 << m.generator_depth;
    check(m.input_size % mult == 0, "model.input_size " + std::to_string(m.input_size) +
                                        " must be a multiple of " + std::to_string(mult) +
                                        " for generator depth " + std::to_string(m.generator_depth));
  }
  if (errs.empty()) {
    try {
      detkit::Detector probe(detector_config(c), 0);
    } catch (const ConfigError& e) {
      errs.push_back(std::string("model: ") + e.what());
    }
  }
  try {
    maskaug::validate(augment_policy(c));
  } catch (const ConfigError& e) {
    errs.push_back(std::string("augment: ") + e.what());
  }
  const auto& t = c.train;
  check(t.batch_size >= 1, "train.batch_size must be >= 1");
  check(t.epoch_scale > 0, "train.epoch_scale must be positive");
  check(t.lambda_p >= 0, "train.lambda_p must be >= 0");
  check(t.d_lr_scale > 0, "train.d_lr_scale must be positive");
  check(t.momentum >= 0 && t.momentum < 1, "train.momentum must lie in [0, 1)");
  for (auto [s, name] : {std::pair{&t.phase1_schedule, "train.phase1_schedule"},
                         std::pair{&t.gan_schedule, "train.gan_schedule"},
                         std::pair{&t.phase2_schedule, "train.phase2_schedule"}}) {
    try {
      numkit::validate_schedule(*s, name);
    } catch (const ConfigError& e) {
      errs.push_back(e.what());
    }
  }
  check(!c.output_dir.empty(), "output.dir must not be empty");
  if (!errs.empty()) throw ConfigError(join(errs, "\n"));
}

std::string echo_config(const PipelineConfig& c) {
  PipelineConfig copy = c;
  std::ostringstream os;
  bool first = true;
  for (auto& [section, fields] : registry(copy)) {
    os << (first ? "" : "\n") << "[" << section << "]\n";
    first = false;
    for (auto& [key, f] : fields) os << key << " = " << f.get() << "\n";
  }
  return os.str();
}

maskaug::AugmentPolicy augment_policy(const PipelineConfig& c) {
  maskaug::AugmentPolicy p = c.augment.policy;
  p.batch_size = c.train.batch_size;
  return p;
}

imageio::SceneConfig scene_config(const PipelineConfig& c) {
  imageio::SceneConfig s = c.dataset.scene;
  s.image_size = c.model.input_size;
  return s;
}

detkit::DetectorConfig detector_config(const PipelineConfig& c, int num_classes) {
  detkit::DetectorConfig d;
  d.input_size = c.model.input_size;
  d.num_classes = num_classes > 0 ? num_classes : c.dataset.scene.num_classes;
  d.width = c.model.width;
  d.layers = c.model.layers;
  detkit::assign_linear_scales(d.layers, c.model.scale_min, c.model.scale_max);
  d.fusion = c.model.fusion;
  return d;
}

}  // namespace fgaug::pipeline
