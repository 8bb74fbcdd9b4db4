#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pageseg/featmap.hpp"
#include "pageseg/image_io.hpp"
#include "pageseg/imaging.hpp"

namespace pageseg {

struct PCAModel {
  int dim = 0;
  std::vector<double> mean;                // dim
  std::vector<double> components;          // k rows of dim, orthonormal
  std::vector<double> explained_variance;  // k, non-increasing
  std::vector<int> orientation;            // +1/-1 applied by canonicalize_signs
  bool degenerate = false;                 // fewer than k non-zero variances
  bool orientation_unresolved = false;     // canonicalization lacked low- or high-ink positions

  int k() const noexcept { return static_cast<int>(explained_variance.size()); }
  std::span<const double> component(int i) const {
    return {components.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  /// componentᵢ · (v - mean)
  double project(int i, std::span<const float> v) const;
  void flip(int i);
};

/// PCA of n row vectors of width dim (row-major), sample covariance with n-1.
PCAModel fit_pca(std::span<const float> rows, int n, int dim, int k);

struct PcaFitOptions {
  int k = 3;
  long max_samples = 100000;
  std::uint64_t seed = 0;
};

/// PCA of the densified map: every pixel position, or a uniform seeded
/// subsample of at most max_samples positions.
PCAModel fit_pca(const FeatureMap& map, const PcaFitOptions& opts);

/// Orients every component so that low-ink grid cells (window foreground
/// ratio below low_ink_ratio) project at least as high as the others.
PCAModel canonicalize_signs(const PCAModel& pca, const FeatureMap& map, const BinaryImage& bin,
                            double low_ink_ratio = 0.01);

/// Orients every component so that, over grid cells containing ink, the
/// projection decreases with the mean component height in the window: larger
/// glyphs (main text) score lower. Unresolved when fewer than two inked cells
/// or no height variation exist.
PCAModel canonicalize_signs_by_glyph_size(const PCAModel& pca, const FeatureMap& map, const BinaryImage& bin,
                                          int min_area = kDefaultMinArea);

/// Per-pixel component maps at image resolution, first k components.
std::vector<Grid<float>> project(const PCAModel& pca, const FeatureMap& map, int k = -1);

enum class ThresholdMode { kFixed, kAuto };
enum class OrientationAnchor { kGlyphSize, kInkDensity };
/// Pixels whose component values feed the automatic thresholds.
enum class ThresholdPopulation { kForeground, kAll };

struct SegmentationConfig {
  int k = 3;
  ThresholdMode threshold_mode = ThresholdMode::kAuto;
  ThresholdPopulation threshold_population = ThresholdPopulation::kForeground;
  OrientationAnchor orientation = OrientationAnchor::kGlyphSize;
  double t1 = 0.0;
  double t2 = 0.0;
  long pca_max_samples = 100000;
  std::uint64_t pca_seed = 0;
  double low_ink_ratio = 0.01;

  void validate() const;
};

using MainTextMask = Grid<std::uint8_t>;

struct ThresholdResult {
  MainTextMask mask;
  double t1 = 0.0;
  double t2 = 0.0;
};

/// Sign convention selected by cfg.orientation.
PCAModel orient_components(const PCAModel& pca, const FeatureMap& map, const BinaryImage& bin,
                           const SegmentationConfig& cfg);

/// mask(p) = pc1(p) < T1 and pc2(p) < T2; auto mode picks each T by Otsu over
/// all pixels, or over the foreground pixels of bin when the population is
/// kForeground.
ThresholdResult threshold_main_text(const Grid<float>& pc1, const Grid<float>& pc2, const SegmentationConfig& cfg,
                                    const BinaryImage* bin = nullptr);

/// 0 background, 1 foreground inside the mask, 2 foreground outside it.
PageSegmentation assign_labels(const MainTextMask& mask, const BinaryImage& bin);

/// PC1..PC3 min-max scaled into R, G, B; a constant component renders 128.
RgbImage visualize_pca_rgb(std::span<const Grid<float>> components);
RgbImage visualize_pca_rgb(const PCAModel& pca, const FeatureMap& map);

Grid<std::uint8_t> mask_to_gray(const MainTextMask& mask);

struct PageResult {
  FeatureMap features;
  PCAModel pca;
  std::vector<Grid<float>> components;
  ThresholdResult threshold;
  BinaryImage binary;
  PageSegmentation segmentation;
};

/// Feature map -> PCA -> orientation -> threshold -> labels for one page.
PageResult segment_page(const FeatureExtractor& extractor, const DocumentImage& img, const SlidingConfig& sliding,
                        const SegmentationConfig& cfg, const BinarizeOptions& binarize_opts = {});

/// Same as segment_page from an already extracted map.
PageResult segment_features(FeatureMap features, const DocumentImage& img, const SegmentationConfig& cfg,
                            const BinarizeOptions& binarize_opts = {});

}  // namespace pageseg
