#include "pageseg/segment.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pageseg/errors.hpp"

namespace pageseg {

double PCAModel::project(int i, std::span<const float> v) const {
  if (v.size() != static_cast<std::size_t>(dim)) throw ShapeError("projection vector has the wrong dimension");
  const auto c = component(i);
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += c[static_cast<std::size_t>(d)] * (v[static_cast<std::size_t>(d)] - mean[static_cast<std::size_t>(d)]);
  return s;
}

void PCAModel::flip(int i) {
  auto* c = components.data() + static_cast<std::size_t>(i) * dim;
  for (int d = 0; d < dim; ++d) c[d] = -c[d];
  orientation[static_cast<std::size_t>(i)] = -orientation[static_cast<std::size_t>(i)];
}

namespace {

// Rows come from a producer so the map variant never holds all samples.
template <typename Producer>
PCAModel fit_rows(long n, int dim, int k, Producer&& row_at) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (k > dim) throw ConfigError("k exceeds the feature dimension");
  if (n < 2 || n < k) throw UndefinedStatisticError("PCA needs at least max(2, k) samples");

  std::vector<float> buf(static_cast<std::size_t>(dim));
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (long r = 0; r < n; ++r) {
    row_at(r, std::span<float>(buf));
    for (int d = 0; d < dim; ++d) mean[d] += buf[static_cast<std::size_t>(d)];
  }
  mean /= static_cast<double>(n);

  constexpr long kChunk = 2048;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd chunk(kChunk, dim);
  for (long start = 0; start < n; start += kChunk) {
    const long rows = std::min(kChunk, n - start);
    for (long r = 0; r < rows; ++r) {
      row_at(start + r, std::span<float>(buf));
      for (int d = 0; d < dim; ++d) chunk(r, d) = buf[static_cast<std::size_t>(d)] - mean[d];
    }
    cov.selfadjointView<Eigen::Lower>().rankUpdate(chunk.topRows(rows).transpose());
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n - 1);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw UndefinedStatisticError("covariance eigendecomposition failed");

  PCAModel m;
  m.dim = dim;
  m.mean.assign(mean.data(), mean.data() + dim);
  const double top = std::max(eig.eigenvalues()[dim - 1], 0.0);
  const double tol = 1e-12 * std::max(1.0, top);
  for (int i = 0; i < k; ++i) {
    const int col = dim - 1 - i;
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    // Largest-magnitude entry positive, so the raw fit is reproducible.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    const double var = std::max(eig.eigenvalues()[col], 0.0);
    if (var <= tol) m.degenerate = true;
    m.explained_variance.push_back(var);
    m.components.insert(m.components.end(), v.data(), v.data() + dim);
    m.orientation.push_back(1);
  }
  return m;
}

}  // namespace

PCAModel fit_pca(std::span<const float> rows, int n, int dim, int k) {
  if (dim < 1 || rows.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(dim)) {
    throw ShapeError("sample matrix size does not match n x dim");
  }
  return fit_rows(n, dim, k, [&](long r, std::span<float> out) {
    std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(r) * dim, dim, out.begin());
  });
}

PCAModel fit_pca(const FeatureMap& map, const PcaFitOptions& opts) {
  const DenseFeatureView view(map);
  const long total = static_cast<long>(view.width()) * view.height();
  std::vector<long> positions;
  if (opts.max_samples <= 0 || total <= opts.max_samples) {
    positions.resize(static_cast<std::size_t>(total));
    std::iota(positions.begin(), positions.end(), 0L);
  } else {
    std::mt19937_64 rng(opts.seed);
    std::vector<long> all(static_cast<std::size_t>(total));
    std::iota(all.begin(), all.end(), 0L);
    positions.reserve(static_cast<std::size_t>(opts.max_samples));
    std::sample(all.begin(), all.end(), std::back_inserter(positions), opts.max_samples, rng);
  }
  const int w = view.width();
  return fit_rows(static_cast<long>(positions.size()), map.channels, opts.k, [&](long r, std::span<float> out) {
    const long p = positions[static_cast<std::size_t>(r)];
    view.sample(static_cast<int>(p % w), static_cast<int>(p / w), out);
  });
}

namespace {

std::vector<long> integral_of(const BinaryImage& bin) {
  const int w = bin.width();
  std::vector<long> ii(static_cast<std::size_t>(w + 1) * (bin.height() + 1), 0);
  for (int y = 0; y < bin.height(); ++y) {
    long run = 0;
    for (int x = 0; x < w; ++x) {
      run += bin(x, y) != 0 ? 1 : 0;
      ii[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] = ii[static_cast<std::size_t>(y) * (w + 1) + x + 1] + run;
    }
  }
  return ii;
}

long box_sum(const std::vector<long>& ii, int w, int x0, int y0, int x1, int y1) {
  const auto at = [&](int x, int y) { return ii[static_cast<std::size_t>(y) * (w + 1) + x]; };
  return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
}

}  // namespace

PCAModel canonicalize_signs(const PCAModel& pca, const FeatureMap& map, const BinaryImage& bin, double low_ink_ratio) {
  map.validate();
  if (map.channels != pca.dim) throw ShapeError("feature map channels do not match the PCA dimension");
  if (bin.width() != map.target_width || bin.height() != map.target_height) {
    throw ShapeError("binary image does not match the feature map target size");
  }
  const auto ii = integral_of(bin);
  std::vector<char> low;
  for (int gy = 0; gy < map.grid_height; ++gy) {
    for (int gx = 0; gx < map.grid_width; ++gx) {
      // Window footprint, clipped for stride-1 maps whose window is 1.
      const int x0 = map.xs[static_cast<std::size_t>(gx)];
      const int y0 = map.ys[static_cast<std::size_t>(gy)];
      const int x1 = std::min(bin.width(), x0 + map.window);
      const int y1 = std::min(bin.height(), y0 + map.window);
      const double area = static_cast<double>(x1 - x0) * (y1 - y0);
      const double ratio = static_cast<double>(box_sum(ii, bin.width(), x0, y0, x1, y1)) / area;
      low.push_back(ratio < low_ink_ratio ? 1 : 0);
    }
  }
  const long n_low = std::count(low.begin(), low.end(), 1);
  const long n_high = static_cast<long>(low.size()) - n_low;

  PCAModel out = pca;
  out.orientation_unresolved = n_low == 0 || n_high == 0;
  if (out.orientation_unresolved) return out;
  for (int i = 0; i < out.k(); ++i) {
    double sum_low = 0.0;
    double sum_high = 0.0;
    std::size_t c = 0;
    for (int gy = 0; gy < map.grid_height; ++gy) {
      for (int gx = 0; gx < map.grid_width; ++gx, ++c) {
        const double p = out.project(i, map.cell(gx, gy));
        (low[c] ? sum_low : sum_high) += p;
      }
    }
    if (sum_low / n_low < sum_high / n_high) out.flip(i);
  }
  return out;
}

PCAModel canonicalize_signs_by_glyph_size(const PCAModel& pca, const FeatureMap& map, const BinaryImage& bin,
                                          int min_area) {
  map.validate();
  if (map.channels != pca.dim) throw ShapeError("feature map channels do not match the PCA dimension");
  if (bin.width() != map.target_width || bin.height() != map.target_height) {
    throw ShapeError("binary image does not match the feature map target size");
  }
  std::vector<double> heights;
  std::vector<std::pair<int, int>> cells;
  for (int gy = 0; gy < map.grid_height; ++gy) {
    for (int gx = 0; gx < map.grid_width; ++gx) {
      const PatchGeometry g{map.xs[static_cast<std::size_t>(gx)], map.ys[static_cast<std::size_t>(gy)], map.window};
      const ComponentStats s = component_stats(bin, g, min_area);
      if (s.component_count == 0) continue;
      heights.push_back(s.avg_height);
      cells.emplace_back(gx, gy);
    }
  }
  PCAModel out = pca;
  const auto [lo, hi] = std::minmax_element(heights.begin(), heights.end());
  out.orientation_unresolved = heights.size() < 2 || *lo == *hi;
  if (out.orientation_unresolved) return out;
  double mean_h = 0.0;
  for (double h : heights) mean_h += h;
  mean_h /= static_cast<double>(heights.size());
  for (int i = 0; i < out.k(); ++i) {
    // The projection mean cancels in the covariance because heights are centered.
    double cov = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      cov += out.project(i, map.cell(cells[c].first, cells[c].second)) * (heights[c] - mean_h);
    }
    if (cov > 0.0) out.flip(i);
  }
  return out;
}

PCAModel orient_components(const PCAModel& pca, const FeatureMap& map, const BinaryImage& bin,
                           const SegmentationConfig& cfg) {
  if (cfg.orientation == OrientationAnchor::kInkDensity) return canonicalize_signs(pca, map, bin, cfg.low_ink_ratio);
  return canonicalize_signs_by_glyph_size(pca, map, bin);
}

std::vector<Grid<float>> project(const PCAModel& pca, const FeatureMap& map, int k) {
  map.validate();
  if (map.channels != pca.dim) throw ShapeError("feature map channels do not match the PCA dimension");
  if (k < 0) k = pca.k();
  if (k > pca.k()) throw ConfigError("requested more components than the model holds");
  // Projection is affine, so projecting grid cells and upsampling the scalar
  // fields equals projecting every interpolated feature.
  const DenseFeatureView view(map);
  std::vector<Grid<float>> out;
  std::vector<float> cells(static_cast<std::size_t>(map.grid_width) * map.grid_height);
  for (int i = 0; i < k; ++i) {
    std::size_t c = 0;
    for (int gy = 0; gy < map.grid_height; ++gy) {
      for (int gx = 0; gx < map.grid_width; ++gx) cells[c++] = static_cast<float>(pca.project(i, map.cell(gx, gy)));
    }
    out.push_back(view.upsample_scalar(cells));
  }
  return out;
}

void SegmentationConfig::validate() const {
  if (k < 2) throw ConfigError("segmentation needs k >= 2");
  if (threshold_mode == ThresholdMode::kFixed && (std::isnan(t1) || std::isnan(t2))) {
    throw ConfigError("fixed thresholds must not be NaN");
  }
  if (low_ink_ratio <= 0.0 || low_ink_ratio >= 1.0) throw ConfigError("low_ink_ratio must be in (0, 1)");
}

ThresholdResult threshold_main_text(const Grid<float>& pc1, const Grid<float>& pc2, const SegmentationConfig& cfg,
                                    const BinaryImage* bin) {
  if (!pc1.same_shape(pc2)) throw ShapeError("component maps differ in size");
  ThresholdResult r;
  if (cfg.threshold_mode == ThresholdMode::kAuto) {
    const bool fg_only = cfg.threshold_population == ThresholdPopulation::kForeground && bin != nullptr;
    if (fg_only && (bin->width() != pc1.width() || bin->height() != pc1.height())) throw ShapeError("binary image and component maps differ in size");
    std::vector<float> v1, v2;
    if (fg_only) {
      for (std::size_t i = 0; i < pc1.size(); ++i) {
        if (bin->data()[i] == 0) continue;
        v1.push_back(pc1.data()[i]);
        v2.push_back(pc2.data()[i]);
      }
    }
    // A page without ink falls back to every pixel.
    if (v1.empty()) {
      v1 = pc1.data();
      v2 = pc2.data();
    }
    r.t1 = otsu_threshold_range(v1);
    r.t2 = otsu_threshold_range(v2);
  } else {
    r.t1 = cfg.t1;
    r.t2 = cfg.t2;
  }
  r.mask = MainTextMask(pc1.width(), pc1.height());
  for (std::size_t i = 0; i < pc1.size(); ++i) {
    r.mask.data()[i] = (pc1.data()[i] < r.t1 && pc2.data()[i] < r.t2) ? 1 : 0;
  }
  return r;
}

PageSegmentation assign_labels(const MainTextMask& mask, const BinaryImage& bin) {
  if (!mask.same_shape(bin)) throw ShapeError("mask and binary image differ in size");
  PageSegmentation seg(bin.width(), bin.height());
  for (std::size_t i = 0; i < bin.size(); ++i) {
    if (bin.data()[i] == 0) continue;
    seg.data()[i] = static_cast<std::uint8_t>(mask.data()[i] != 0 ? PixelLabel::kMainText : PixelLabel::kSideText);
  }
  return seg;
}

RgbImage visualize_pca_rgb(std::span<const Grid<float>> components) {
  if (components.size() < 3) throw ConfigError("RGB visualization needs three components");
  const int w = components[0].width();
  const int h = components[0].height();
  RgbImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3)};
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const auto& g = components[ch];
    if (g.width() != w || g.height() != h) throw ShapeError("component maps differ in size");
    const auto [lo, hi] = std::minmax_element(g.data().begin(), g.data().end());
    const double range = static_cast<double>(*hi) - *lo;
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::uint8_t v = 128;
      if (range > 0.0) v = static_cast<std::uint8_t>(std::lround(255.0 * (g.data()[i] - *lo) / range));
      img.rgb[i * 3 + ch] = v;
    }
  }
  return img;
}

RgbImage visualize_pca_rgb(const PCAModel& pca, const FeatureMap& map) {
  const auto comps = project(pca, map, 3);
  return visualize_pca_rgb(comps);
}

Grid<std::uint8_t> mask_to_gray(const MainTextMask& mask) {
  Grid<std::uint8_t> g(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) g.data()[i] = mask.data()[i] != 0 ? 255 : 0;
  return g;
}

PageResult segment_features(FeatureMap features, const DocumentImage& img, const SegmentationConfig& cfg,
                            const BinarizeOptions& binarize_opts) {
  cfg.validate();
  if (features.target_width != img.width() || features.target_height != img.height()) {
    throw ShapeError("feature map target size does not match the image");
  }
  PageResult r;
  r.binary = binarize(img, binarize_opts);
  const PcaFitOptions fit{cfg.k, cfg.pca_max_samples, cfg.pca_seed};
  r.pca = orient_components(fit_pca(features, fit), features, r.binary, cfg);
  r.components = project(r.pca, features);
  r.threshold = threshold_main_text(r.components[0], r.components[1], cfg, &r.binary);
  r.segmentation = assign_labels(r.threshold.mask, r.binary);
  r.features = std::move(features);
  return r;
}

PageResult segment_page(const FeatureExtractor& extractor, const DocumentImage& img, const SlidingConfig& sliding,
                        const SegmentationConfig& cfg, const BinarizeOptions& binarize_opts) {
  return segment_features(extract_feature_map(extractor, img, sliding), img, cfg, binarize_opts);
}

}  // namespace pageseg
