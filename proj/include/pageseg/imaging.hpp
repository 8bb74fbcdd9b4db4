#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pageseg/grid.hpp"

namespace pageseg {

/// Grayscale page, intensities in [0,1] (0 = black ink, 1 = white paper).
struct DocumentImage {
  Grid<float> pixels;
  std::string source_id;

  int width() const noexcept { return pixels.width(); }
  int height() const noexcept { return pixels.height(); }
};

/// Foreground mask; nonzero = ink.
using BinaryImage = Grid<std::uint8_t>;

/// Per-pixel page labels as stored in label PNGs.
enum class PixelLabel : std::uint8_t { kBackground = 0, kMainText = 1, kSideText = 2 };
using PageSegmentation = Grid<std::uint8_t>;

struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct ConnectedComponent {
  BoundingBox bbox;
  long area = 0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
};

struct ComponentStats {
  double avg_height = 0.0;
  double avg_width = 0.0;
  long component_count = 0;
  long foreground_count = 0;
  friend bool operator==(const ComponentStats&, const ComponentStats&) = default;
};

/// Square crop location: top-left corner and side length.
struct PatchGeometry {
  int x = 0;
  int y = 0;
  int size = 0;
  friend bool operator==(const PatchGeometry&, const PatchGeometry&) = default;
};

struct Patch {
  Grid<float> pixels;
  std::string source_id;
  PatchGeometry geometry;
};

enum class BinarizationMethod { kOtsu, kSauvola };

struct BinarizeOptions {
  BinarizationMethod method = BinarizationMethod::kOtsu;
  int sauvola_window = 31;
  double sauvola_k = 0.34;
};

inline constexpr int kDefaultMinArea = 4;

/// Reads PNG/TIFF/JPEG and converts to luminance (0.299 R + 0.587 G + 0.114 B).
DocumentImage load_image(const std::filesystem::path& path);

/// Global Otsu threshold over a 256-bin histogram of [0,1] intensities.
/// Returns the intensity t such that pixels with value < t are foreground;
/// a constant image yields 0 (nothing is foreground).
double otsu_threshold(std::span<const float> values);

/// Otsu over an arbitrary real range; returns a value between min and max.
/// Used for principal-component histograms.
double otsu_threshold_range(std::span<const float> values, int bins = 256);

BinaryImage binarize(const DocumentImage& img, const BinarizeOptions& opts = {});

/// 8-connected labeling; components smaller than min_area are dropped.
std::vector<ConnectedComponent> connected_components(const BinaryImage& bin, int min_area = kDefaultMinArea);

/// Statistics of components inside region only. Components crossing the region
/// border are clipped to it.
ComponentStats component_stats(const BinaryImage& bin, const PatchGeometry& region,
                               int min_area = kDefaultMinArea);

long foreground_count(const BinaryImage& bin, const PatchGeometry& region);

/// 4 x mean component height over every document, rounded.
int estimate_patch_size(std::span<const DocumentImage> docs, int min_area = kDefaultMinArea,
                        const BinarizeOptions& opts = {});

bool geometry_inside(const PatchGeometry& geom, int width, int height) noexcept;

Patch crop_patch(const DocumentImage& img, const PatchGeometry& geom);

}  // namespace pageseg
