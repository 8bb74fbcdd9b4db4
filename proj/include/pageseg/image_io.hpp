#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pageseg/grid.hpp"

namespace pageseg {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // interleaved, row-major
};

/// 8-bit RGB decode of any supported raster (PNG natively, TIFF/JPEG via OpenCV).
RgbImage read_rgb(const std::filesystem::path& path);

/// Raw sample values of a single-channel PNG: palette indices for indexed
/// images, gray levels otherwise. Used for label maps.
Grid<std::uint8_t> read_indexed_png(const std::filesystem::path& path);

void write_gray_png(const std::filesystem::path& path, const Grid<std::uint8_t>& gray);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& img);

using Palette = std::vector<std::array<std::uint8_t, 3>>;
void write_indexed_png(const std::filesystem::path& path, const Grid<std::uint8_t>& indices,
                       const Palette& palette);

/// Palette used for segmentation and label files: 0 white, 1 red, 2 blue.
const Palette& label_palette();

}  // namespace pageseg
