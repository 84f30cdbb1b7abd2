// Random inputs and small synthetic datasets for tests.
#pragma once

#include <filesystem>
#include <random>
#include <utility>

#include "hrsal/image.hpp"

namespace synth {

using Rng = std::mt19937_64;

hrsal::SaliencyMap random_map(Rng& rng, int w, int h);
hrsal::BinaryMask random_mask(Rng& rng, int w, int h, double density);
// Union of 1..4 random filled ellipses.
hrsal::BinaryMask blob_mask(Rng& rng, int w, int h);
hrsal::RasterImage random_image(Rng& rng, int w, int h);
hrsal::RasterImage constant_image(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

// A bright ellipse on a darker noisy background, with its mask.
std::pair<hrsal::RasterImage, hrsal::BinaryMask> scene(Rng& rng, int w, int h);

// Writes images/NAME.png and gt/NAME.png for `count` scenes.
void write_dataset(const std::filesystem::path& root, int count, int w, int h, std::uint64_t seed);

// Unique empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace synth
