#include "fgaug/imageio/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fgaug/errors.hpp"
#include "fgaug/imageio/pnm.hpp"
#include "fgaug/numkit/rng.hpp"

namespace fgaug::imageio {

namespace fs = std::filesystem;

namespace {

std::set<std::string> stems_with_ext(const fs::path& dir, const std::string& ext) {
  std::set<std::string> stems;
  if (!fs::is_directory(dir)) return stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      stems.insert(entry.path().stem().string());
    }
  }
  return stems;
}

std::string read_text(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError(p.string(), "cannot open file");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<PairedSample> load_pairs_dataset(const fs::path& root, const ClassTable& classes) {
  if (!fs::is_directory(root)) throw IoError(root.string(), "dataset root is not a directory");
  const auto images = stems_with_ext(root / "images", ".ppm");
  const auto masks = stems_with_ext(root / "masks", ".pgm");
  const auto annotations = stems_with_ext(root / "annotations", ".xml");

  std::set<std::string> all;
  all.insert(images.begin(), images.end());
  all.insert(masks.begin(), masks.end());
  all.insert(annotations.begin(), annotations.end());

  std::vector<std::string> orphans;
  for (const auto& s : all) {
    std::string missing;
    if (!images.count(s)) missing += " image";
    if (!masks.count(s)) missing += " mask";
    if (!annotations.count(s)) missing += " annotation";
    if (!missing.empty()) orphans.push_back(s + " (missing" + missing + ")");
  }
  if (!orphans.empty()) {
    std::string msg = root.string() + ": unpaired stems:";
    for (const auto& o : orphans) msg += " " + o + ";";
    throw DatasetError(msg);
  }

  std::vector<PairedSample> out;
  for (const auto& stem : all) {  // std::set iterates in stem order
    PairedSample s;
    s.stem = stem;
    s.image = load_image(root / "images" / (stem + ".ppm"));
    s.mask = load_mask(root / "masks" / (stem + ".pgm"));
    const fs::path ann = root / "annotations" / (stem + ".xml");
    try {
      s.boxes = parse_voc_annotation(read_text(ann), classes);
    } catch (const ParseError& e) {
      throw ParseError(ann.string() + ": " + e.what());
    }
    validate_sample(s);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PairedSample> make_synthetic_dataset(std::uint64_t seed, const SceneConfig& config,
                                                 std::size_t count) {
  validate(config);
  std::vector<PairedSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    PairedSample s = gen_synthetic_scene(numkit::mix_seed(seed, i), config);
    char stem[32];
    std::snprintf(stem, sizeof stem, "%06zu", i);
    s.stem = stem;
    out.push_back(std::move(s));
  }
  return out;
}

void write_pairs_dataset(const fs::path& root, const std::vector<PairedSample>& samples,
                         const ClassTable& classes) {
  std::error_code ec;
  for (const char* sub : {"images", "masks", "annotations"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw IoError((root / sub).string(), "cannot create directory: " + ec.message());
  }
  for (const auto& s : samples) {
    save_image(s.image, root / "images" / (s.stem + ".ppm"));
    save_mask(s.mask, root / "masks" / (s.stem + ".pgm"));
    const fs::path ann = root / "annotations" / (s.stem + ".xml");
    std::ofstream os(ann, std::ios::trunc);
    if (!os) throw IoError(ann.string(), "cannot open for writing");
    os << write_voc_annotation(s.stem + ".ppm", s.image.width, s.image.height, s.image.channels,
                               s.boxes, classes);
  }
}

std::vector<PairedSample> make_dataset(const fs::path& root, DatasetKind kind,
                                       const ClassTable& classes) {
  if (classes.size() > 0) return load_pairs_dataset(root, classes);
  const fs::path table = root / "classes.txt";
  if (kind == DatasetKind::Synthetic || fs::exists(table)) {
    return load_pairs_dataset(root, ClassTable::load(table));
  }
  throw ConfigError(root.string() + ": no class table given and no classes.txt in the root");
}

}  // namespace fgaug::imageio
