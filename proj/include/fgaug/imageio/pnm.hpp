#pragma once

#include <filesystem>

#include "fgaug/imageio/image.hpp"

namespace fgaug::imageio {

// Binary portable pixmaps: P6 (3 channels) and P5 (1 channel), maxval <= 255.
Image load_image(const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);

// Masks are stored as P5; any value >= 128 reads as foreground.
BinaryMask load_mask(const std::filesystem::path& path);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

}  // namespace fgaug::imageio
