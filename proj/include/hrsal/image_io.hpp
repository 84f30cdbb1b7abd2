/**
 * @file image_io.hpp
 * @brief PNG / JPEG / binary PGM reading and writing for the raster types.
 *
 * Maps and masks are stored as 8-bit grayscale. The output format is chosen
 * by extension: ".pgm" writes binary P5, anything else goes through PNG.
 * Every failure raises IoError naming the offending path.
 */
#pragma once

#include <filesystem>
#include <optional>

#include "hrsal/image.hpp"

namespace hrsal {

RasterImage load_image(const std::filesystem::path& path);
SaliencyMap load_map(const std::filesystem::path& path);
/// Any grayscale (or color, via luma) file; samples > 127 become 1.
BinaryMask load_mask(const std::filesystem::path& path);

void save_image(const std::filesystem::path& path, const RasterImage& image);
void save_map(const std::filesystem::path& path, const SaliencyMap& map);
void save_mask(const std::filesystem::path& path, const BinaryMask& mask);

struct ImageSize {
    int width = 0;
    int height = 0;
};

/// Reads only the header of a PNG, JPEG or PGM file. Returns nullopt for
/// other formats or unreadable headers.
std::optional<ImageSize> probe_dimensions(const std::filesystem::path& path);

}  // namespace hrsal
