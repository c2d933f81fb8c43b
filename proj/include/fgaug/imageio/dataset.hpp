#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fgaug/imageio/image.hpp"
#include "fgaug/imageio/synthetic.hpp"
#include "fgaug/imageio/voc.hpp"

namespace fgaug::imageio {

enum class DatasetKind { VocPairs, Synthetic };

// Reads root/{images/*.ppm, masks/*.pgm, annotations/*.xml}. Samples come
// back sorted by stem. Stems missing any of the three files are reported
// together in one DatasetError.
std::vector<PairedSample> load_pairs_dataset(const std::filesystem::path& root,
                                             const ClassTable& classes);

// `count` scenes, scene i seeded from mix_seed(seed, i). Stems are
// zero-padded indices.
std::vector<PairedSample> make_synthetic_dataset(std::uint64_t seed, const SceneConfig& config,
                                                 std::size_t count);

// Writes samples in the pairs layout (creating the directories).
void write_pairs_dataset(const std::filesystem::path& root, const std::vector<PairedSample>& samples,
                         const ClassTable& classes);

}  // namespace fgaug::imageio

namespace fgaug::imageio {

// Both kinds share the on-disk layout; a synthetic root is one written by
// the generator (it carries its own classes.txt, used when `classes` is
// empty).
std::vector<PairedSample> make_dataset(const std::filesystem::path& root, DatasetKind kind,
                                       const ClassTable& classes = {});

}  // namespace fgaug::imageio
