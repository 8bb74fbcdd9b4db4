#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "pageseg/imaging.hpp"
#include "pageseg/model.hpp"

namespace pageseg {

struct SlidingConfig {
  int window = 200;
  int stride = 50;
  int batch = 64;
  /// Adds one window flush with the right/bottom edge when (size - window)
  /// is not a multiple of stride.
  bool cover_edges = true;

  void validate() const;
};

/// Embeddings on a grid of window positions. Cell (gx, gy) holds the
/// embedding of the window whose top-left corner is (xs[gx], ys[gy]).
struct FeatureMap {
  int grid_width = 0;
  int grid_height = 0;
  int channels = 0;
  int stride = 0;
  int window = 0;
  int origin_x = 0;
  int origin_y = 0;
  int target_width = 0;
  int target_height = 0;
  std::vector<int> xs;
  std::vector<int> ys;
  std::vector<float> values;  // ((gy * grid_width) + gx) * channels + c

  std::span<const float> cell(int gx, int gy) const;
  std::span<float> cell(int gx, int gy);
  float value(int gx, int gy, int c) const { return values[index(gx, gy) + static_cast<std::size_t>(c)]; }

  /// Window center of column gx / row gy in pixel coordinates.
  double anchor_x(int gx) const { return xs[static_cast<std::size_t>(gx)] + (window - 1) / 2.0; }
  double anchor_y(int gy) const { return ys[static_cast<std::size_t>(gy)] + (window - 1) / 2.0; }

  void validate() const;

 private:
  std::size_t index(int gx, int gy) const {
    return (static_cast<std::size_t>(gy) * static_cast<std::size_t>(grid_width) + static_cast<std::size_t>(gx)) *
           static_cast<std::size_t>(channels);
  }
};

/// Window offsets along one axis of length extent.
std::vector<int> window_positions(int extent, int window, int stride, bool cover_edges, int origin = 0);

FeatureMap extract_feature_map(const FeatureExtractor& extractor, const DocumentImage& img, const SlidingConfig& cfg);

/// Bilinear interpolation weights from pixel positions to grid anchors.
struct AxisInterp {
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<double> t;  // weight of hi
};

AxisInterp axis_interpolation(const std::vector<double>& anchors, int extent);

/// On-demand bilinear upsampling of a grid map to its target resolution,
/// anchored at window centers and clamped outside them.
class DenseFeatureView {
 public:
  explicit DenseFeatureView(const FeatureMap& map);

  int width() const noexcept { return map_->target_width; }
  int height() const noexcept { return map_->target_height; }
  int channels() const noexcept { return map_->channels; }
  const FeatureMap& grid() const noexcept { return *map_; }

  /// Writes the interpolated feature of pixel (x, y) into out.
  void sample(int x, int y, std::span<float> out) const;
  /// Interpolation at a continuous location, for anchor checks.
  void sample_at(double x, double y, std::span<float> out) const;

  /// Upsamples a per-cell scalar field (grid_width x grid_height).
  Grid<float> upsample_scalar(std::span<const float> cells) const;

 private:
  const FeatureMap* map_;
  AxisInterp ix_;
  AxisInterp iy_;
};

/// Fully materialized stride-1 map at image resolution. Memory grows as
/// width * height * channels; intended for small images.
FeatureMap densify(const FeatureMap& map);

void save_feature_map(const std::filesystem::path& path, const FeatureMap& map);
FeatureMap load_feature_map(const std::filesystem::path& path);

}  // namespace pageseg
