#include "pageseg/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "pageseg/image_io.hpp"

namespace pageseg {
namespace {

int intensity_bin(float v) {
  return std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, 255);
}

// Returns the first index t in [1, bins) maximizing between-class variance
// for classes [0, t) and [t, bins), or 0 when every split has zero variance.
template <std::size_t N>
int otsu_split(const std::array<double, N>& hist) {
  const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
  if (total <= 0.0) return 0;
  double sum_all = 0.0;
  for (std::size_t i = 0; i < N; ++i) sum_all += static_cast<double>(i) * hist[i];

  double w0 = 0.0;
  double sum0 = 0.0;
  double best = 0.0;
  int best_t = 0;
  for (std::size_t t = 1; t < N; ++t) {
    w0 += hist[t - 1];
    sum0 += static_cast<double>(t - 1) * hist[t - 1];
    const double w1 = total - w0;
    if (w0 <= 0.0 || w1 <= 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = (w0 / total) * (w1 / total) * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = static_cast<int>(t);
    }
  }
  return best_t;
}

int otsu_bin_split(std::span<const float> values) {
  std::array<double, 256> hist{};
  for (float v : values) hist[intensity_bin(v)] += 1.0;
  return otsu_split(hist);
}

struct DisjointSet {
  std::vector<int> parent;
  int make() {
    parent.push_back(static_cast<int>(parent.size()));
    return parent.back();
  }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

BinaryImage sauvola(const DocumentImage& img, const BinarizeOptions& opts) {
  const int w = img.width();
  const int h = img.height();
  const int half = std::max(1, opts.sauvola_window / 2);
  std::vector<double> sum(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  std::vector<double> sq(sum.size(), 0.0);
  auto at = [w](int x, int y) { return static_cast<std::size_t>(y) * (w + 1) + x; };
  for (int y = 0; y < h; ++y) {
    double rs = 0.0;
    double rq = 0.0;
    for (int x = 0; x < w; ++x) {
      const double v = img.pixels(x, y);
      rs += v;
      rq += v * v;
      sum[at(x + 1, y + 1)] = sum[at(x + 1, y)] + rs;
      sq[at(x + 1, y + 1)] = sq[at(x + 1, y)] + rq;
    }
  }
  // Dynamic range of the standard deviation for [0,1] intensities.
  constexpr double kRange = 0.5;
  BinaryImage out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - half), y1 = std::min(h, y + half + 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - half), x1 = std::min(w, x + half + 1);
      const double n = static_cast<double>((x1 - x0) * (y1 - y0));
      const double s = sum[at(x1, y1)] - sum[at(x0, y1)] - sum[at(x1, y0)] + sum[at(x0, y0)];
      const double q = sq[at(x1, y1)] - sq[at(x0, y1)] - sq[at(x1, y0)] + sq[at(x0, y0)];
      const double mean = s / n;
      const double stddev = std::sqrt(std::max(0.0, q / n - mean * mean));
      const double t = mean * (1.0 + opts.sauvola_k * (stddev / kRange - 1.0));
      out(x, y) = img.pixels(x, y) < t ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

DocumentImage load_image(const std::filesystem::path& path) {
  const RgbImage rgb = read_rgb(path);
  if (rgb.width <= 0 || rgb.height <= 0) throw FormatError("zero-dimension image " + path.string());
  DocumentImage img;
  img.source_id = path.stem().string();
  img.pixels = Grid<float>(rgb.width, rgb.height);
  auto& px = img.pixels.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double lum = 0.299 * rgb.rgb[3 * i] + 0.587 * rgb.rgb[3 * i + 1] + 0.114 * rgb.rgb[3 * i + 2];
    px[i] = static_cast<float>(std::clamp(lum / 255.0, 0.0, 1.0));
  }
  return img;
}

double otsu_threshold(std::span<const float> values) {
  const int t = otsu_bin_split(values);
  if (t == 0) return 0.0;
  return (static_cast<double>(t) - 0.5) / 255.0;
}

double otsu_threshold_range(std::span<const float> values, int bins) {
  if (values.empty()) return 0.0;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return lo;
  if (bins != 256) throw ConfigError("otsu_threshold_range supports 256 bins");
  std::array<double, 256> hist{};
  const double scale = bins / (hi - lo);
  for (float v : values) {
    hist[std::clamp(static_cast<int>((v - lo) * scale), 0, bins - 1)] += 1.0;
  }
  const int t = otsu_split(hist);
  if (t == 0) return lo;
  return lo + static_cast<double>(t) / scale;
}

BinaryImage binarize(const DocumentImage& img, const BinarizeOptions& opts) {
  if (opts.method == BinarizationMethod::kSauvola) return sauvola(img, opts);
  const auto& px = img.pixels.data();
  const int t = otsu_bin_split(px);
  BinaryImage out(img.width(), img.height(), 0);
  if (t == 0) return out;
  auto& mask = out.data();
  for (std::size_t i = 0; i < px.size(); ++i) mask[i] = intensity_bin(px[i]) < t ? 1 : 0;
  return out;
}

std::vector<ConnectedComponent> connected_components(const BinaryImage& bin, int min_area) {
  if (min_area < 1) throw ConfigError("min_area must be >= 1");
  const int w = bin.width();
  const int h = bin.height();
  Grid<int> labels(w, h, -1);
  DisjointSet sets;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!bin(x, y)) continue;
      int label = -1;
      // Already-visited 8-neighbours: W, NW, N, NE.
      constexpr std::array<std::array<int, 2>, 4> kPrev{{{-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
      for (const auto& d : kPrev) {
        const int nx = x + d[0], ny = y + d[1];
        if (!labels.contains(nx, ny)) continue;
        const int nl = labels(nx, ny);
        if (nl < 0) continue;
        if (label < 0) {
          label = nl;
        } else {
          sets.unite(label, nl);
        }
      }
      labels(x, y) = label < 0 ? sets.make() : label;
    }
  }

  struct Acc {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
    long area = 0;
    double sx = 0.0, sy = 0.0;
  };
  std::vector<int> root_index(sets.parent.size(), -1);
  std::vector<Acc> acc;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int l = labels(x, y);
      if (l < 0) continue;
      const int r = sets.find(l);
      if (root_index[r] < 0) {
        root_index[r] = static_cast<int>(acc.size());
        acc.push_back(Acc{x, y, x, y, 0, 0.0, 0.0});
      }
      Acc& a = acc[root_index[r]];
      a.x0 = std::min(a.x0, x);
      a.x1 = std::max(a.x1, x);
      a.y0 = std::min(a.y0, y);
      a.y1 = std::max(a.y1, y);
      a.area += 1;
      a.sx += x;
      a.sy += y;
    }
  }

  std::vector<ConnectedComponent> out;
  out.reserve(acc.size());
  for (const Acc& a : acc) {
    if (a.area < min_area) continue;
    ConnectedComponent cc;
    cc.bbox = {a.x0, a.y0, a.x1 - a.x0 + 1, a.y1 - a.y0 + 1};
    cc.area = a.area;
    cc.centroid_x = a.sx / static_cast<double>(a.area);
    cc.centroid_y = a.sy / static_cast<double>(a.area);
    out.push_back(cc);
  }
  return out;
}

bool geometry_inside(const PatchGeometry& geom, int width, int height) noexcept {
  return geom.size > 0 && geom.x >= 0 && geom.y >= 0 && geom.x + geom.size <= width &&
         geom.y + geom.size <= height;
}

long foreground_count(const BinaryImage& bin, const PatchGeometry& region) {
  if (!geometry_inside(region, bin.width(), bin.height())) throw BoundsError("region outside image");
  long n = 0;
  for (int y = region.y; y < region.y + region.size; ++y) {
    const auto r = bin.row(y);
    for (int x = region.x; x < region.x + region.size; ++x) n += r[x] ? 1 : 0;
  }
  return n;
}

ComponentStats component_stats(const BinaryImage& bin, const PatchGeometry& region, int min_area) {
  if (!geometry_inside(region, bin.width(), bin.height())) throw BoundsError("region outside image");
  BinaryImage crop(region.size, region.size, 0);
  ComponentStats stats;
  for (int y = 0; y < region.size; ++y) {
    for (int x = 0; x < region.size; ++x) {
      const std::uint8_t v = bin(region.x + x, region.y + y) ? 1 : 0;
      crop(x, y) = v;
      stats.foreground_count += v;
    }
  }
  const auto comps = connected_components(crop, min_area);
  stats.component_count = static_cast<long>(comps.size());
  if (comps.empty()) return stats;
  double sh = 0.0, sw = 0.0;
  for (const auto& c : comps) {
    sh += c.bbox.h;
    sw += c.bbox.w;
  }
  stats.avg_height = sh / static_cast<double>(comps.size());
  stats.avg_width = sw / static_cast<double>(comps.size());
  return stats;
}

int estimate_patch_size(std::span<const DocumentImage> docs, int min_area, const BinarizeOptions& opts) {
  double height_sum = 0.0;
  long count = 0;
  for (const auto& doc : docs) {
    for (const auto& c : connected_components(binarize(doc, opts), min_area)) {
      height_sum += c.bbox.h;
      ++count;
    }
  }
  if (count == 0) {
    throw ConfigError("no connected components found; set the patch size explicitly (e.g. 200)");
  }
  return static_cast<int>(std::lround(4.0 * height_sum / static_cast<double>(count)));
}

Patch crop_patch(const DocumentImage& img, const PatchGeometry& geom) {
  if (!geometry_inside(geom, img.width(), img.height())) {
    throw BoundsError("patch (" + std::to_string(geom.x) + "," + std::to_string(geom.y) + ") size " +
                      std::to_string(geom.size) + " outside " + std::to_string(img.width()) + "x" +
                      std::to_string(img.height()) + " image");
  }
  Patch p;
  p.source_id = img.source_id;
  p.geometry = geom;
  p.pixels = Grid<float>(geom.size, geom.size);
  for (int y = 0; y < geom.size; ++y) {
    const auto src = img.pixels.row(geom.y + y);
    std::copy_n(src.begin() + geom.x, geom.size, p.pixels.row(y).begin());
  }
  return p;
}

}  // namespace pageseg
