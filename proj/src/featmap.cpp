#include "pageseg/featmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace pageseg {

void SlidingConfig::validate() const {
  if (window < 1) throw ConfigError("window must be positive");
  if (stride < 1 || stride > window) throw ConfigError("stride must satisfy 1 <= stride <= window");
  if (batch < 1) throw ConfigError("batch must be >= 1");
}

void FeatureMap::validate() const {
  if (grid_width < 1 || grid_height < 1 || channels < 1) throw ShapeError("feature map is empty");
  if (xs.size() != static_cast<std::size_t>(grid_width) || ys.size() != static_cast<std::size_t>(grid_height)) {
    throw ShapeError("feature map positions do not match grid size");
  }
  if (values.size() != static_cast<std::size_t>(grid_width) * grid_height * channels) {
    throw ShapeError("feature map value count does not match its dimensions");
  }
}

std::span<const float> FeatureMap::cell(int gx, int gy) const {
  return {values.data() + index(gx, gy), static_cast<std::size_t>(channels)};
}

std::span<float> FeatureMap::cell(int gx, int gy) {
  return {values.data() + index(gx, gy), static_cast<std::size_t>(channels)};
}

std::vector<int> window_positions(int extent, int window, int stride, bool cover_edges, int origin) {
  if (extent - origin < window) return {};
  std::vector<int> pos;
  for (int p = origin; p + window <= extent; p += stride) pos.push_back(p);
  if (cover_edges && pos.back() + window < extent) pos.push_back(extent - window);
  return pos;
}

FeatureMap extract_feature_map(const FeatureExtractor& extractor, const DocumentImage& img, const SlidingConfig& cfg) {
  cfg.validate();
  if (cfg.window != extractor.input_size()) {
    throw ShapeError("window " + std::to_string(cfg.window) + " does not match the extractor input size " +
                     std::to_string(extractor.input_size()));
  }
  if (img.width() < cfg.window || img.height() < cfg.window) {
    throw ShapeError("image '" + img.source_id + "' (" + std::to_string(img.width()) + "x" +
                     std::to_string(img.height()) + ") is smaller than the " + std::to_string(cfg.window) +
                     "px window; pad it to at least the window size");
  }
  FeatureMap map;
  map.window = cfg.window;
  map.stride = cfg.stride;
  map.channels = extractor.embedding_size();
  map.target_width = img.width();
  map.target_height = img.height();
  map.xs = window_positions(img.width(), cfg.window, cfg.stride, cfg.cover_edges);
  map.ys = window_positions(img.height(), cfg.window, cfg.stride, cfg.cover_edges);
  map.grid_width = static_cast<int>(map.xs.size());
  map.grid_height = static_cast<int>(map.ys.size());
  map.values.resize(static_cast<std::size_t>(map.grid_width) * map.grid_height * map.channels);

  // Windows are cropped in chunks of cfg.batch; each embedding depends only on
  // its own window.
  const std::size_t cells = static_cast<std::size_t>(map.grid_width) * map.grid_height;
  const std::size_t volume = static_cast<std::size_t>(cfg.window) * cfg.window;
  std::vector<float> crops;
  for (std::size_t start = 0; start < cells; start += static_cast<std::size_t>(cfg.batch)) {
    const std::size_t end = std::min(cells, start + static_cast<std::size_t>(cfg.batch));
    crops.resize((end - start) * volume);
    for (std::size_t c = start; c < end; ++c) {
      const int gx = static_cast<int>(c % static_cast<std::size_t>(map.grid_width));
      const int gy = static_cast<int>(c / static_cast<std::size_t>(map.grid_width));
      float* dst = crops.data() + (c - start) * volume;
      for (int y = 0; y < cfg.window; ++y) {
        const auto row = img.pixels.row(map.ys[static_cast<std::size_t>(gy)] + y);
        std::copy_n(row.begin() + map.xs[static_cast<std::size_t>(gx)], cfg.window, dst + static_cast<std::size_t>(y) * cfg.window);
      }
    }
    for (std::size_t c = start; c < end; ++c) {
      const auto emb = extractor(std::span<const float>(crops.data() + (c - start) * volume, volume));
      const int gx = static_cast<int>(c % static_cast<std::size_t>(map.grid_width));
      const int gy = static_cast<int>(c / static_cast<std::size_t>(map.grid_width));
      std::copy(emb.begin(), emb.end(), map.cell(gx, gy).begin());
    }
  }
  return map;
}

namespace {

// Clamped linear weights for a continuous coordinate.
void locate(const std::vector<double>& anchors, double p, int& lo, int& hi, double& t) {
  const int n = static_cast<int>(anchors.size());
  t = 0.0;
  if (p <= anchors.front()) {
    lo = hi = 0;
  } else if (p >= anchors.back()) {
    lo = hi = n - 1;
  } else {
    hi = static_cast<int>(std::upper_bound(anchors.begin(), anchors.end(), p) - anchors.begin());
    lo = hi - 1;
    t = (p - anchors[static_cast<std::size_t>(lo)]) / (anchors[static_cast<std::size_t>(hi)] - anchors[static_cast<std::size_t>(lo)]);
  }
}

}  // namespace

AxisInterp axis_interpolation(const std::vector<double>& anchors, int extent) {
  if (anchors.empty()) throw ShapeError("no interpolation anchors");
  AxisInterp a;
  a.lo.resize(static_cast<std::size_t>(extent));
  a.hi.resize(static_cast<std::size_t>(extent));
  a.t.resize(static_cast<std::size_t>(extent));
  for (int x = 0; x < extent; ++x) {
    const auto i = static_cast<std::size_t>(x);
    locate(anchors, static_cast<double>(x), a.lo[i], a.hi[i], a.t[i]);
  }
  return a;
}

namespace {

std::vector<double> anchors_of(const FeatureMap& m, bool horizontal) {
  std::vector<double> a;
  const int n = horizontal ? m.grid_width : m.grid_height;
  for (int i = 0; i < n; ++i) a.push_back(horizontal ? m.anchor_x(i) : m.anchor_y(i));
  return a;
}

void blend(const FeatureMap& m, int x0, int x1, double tx, int y0, int y1, double ty, std::span<float> out) {
  const auto c00 = m.cell(x0, y0);
  const auto c10 = m.cell(x1, y0);
  const auto c01 = m.cell(x0, y1);
  const auto c11 = m.cell(x1, y1);
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double top = (1.0 - tx) * c00[c] + tx * c10[c];
    const double bottom = (1.0 - tx) * c01[c] + tx * c11[c];
    out[c] = static_cast<float>((1.0 - ty) * top + ty * bottom);
  }
}

}  // namespace

DenseFeatureView::DenseFeatureView(const FeatureMap& map) : map_(&map) {
  map.validate();
  ix_ = axis_interpolation(anchors_of(map, true), map.target_width);
  iy_ = axis_interpolation(anchors_of(map, false), map.target_height);
}

void DenseFeatureView::sample(int x, int y, std::span<float> out) const {
  if (out.size() != static_cast<std::size_t>(map_->channels)) throw ShapeError("sample buffer size mismatch");
  const auto xi = static_cast<std::size_t>(x);
  const auto yi = static_cast<std::size_t>(y);
  blend(*map_, ix_.lo[xi], ix_.hi[xi], ix_.t[xi], iy_.lo[yi], iy_.hi[yi], iy_.t[yi], out);
}

void DenseFeatureView::sample_at(double x, double y, std::span<float> out) const {
  if (out.size() != static_cast<std::size_t>(map_->channels)) throw ShapeError("sample buffer size mismatch");
  int x0, x1, y0, y1;
  double tx, ty;
  locate(anchors_of(*map_, true), x, x0, x1, tx);
  locate(anchors_of(*map_, false), y, y0, y1, ty);
  blend(*map_, x0, x1, tx, y0, y1, ty, out);
}

Grid<float> DenseFeatureView::upsample_scalar(std::span<const float> cells) const {
  const int gw = map_->grid_width;
  if (cells.size() != static_cast<std::size_t>(gw) * map_->grid_height) throw ShapeError("scalar grid size mismatch");
  Grid<float> out(width(), height());
  for (int y = 0; y < height(); ++y) {
    const auto yi = static_cast<std::size_t>(y);
    const std::size_t r0 = static_cast<std::size_t>(iy_.lo[yi]) * gw;
    const std::size_t r1 = static_cast<std::size_t>(iy_.hi[yi]) * gw;
    const double ty = iy_.t[yi];
    auto row = out.row(y);
    for (int x = 0; x < width(); ++x) {
      const auto xi = static_cast<std::size_t>(x);
      const double tx = ix_.t[xi];
      const std::size_t a = static_cast<std::size_t>(ix_.lo[xi]);
      const std::size_t b = static_cast<std::size_t>(ix_.hi[xi]);
      const double top = (1.0 - tx) * cells[r0 + a] + tx * cells[r0 + b];
      const double bottom = (1.0 - tx) * cells[r1 + a] + tx * cells[r1 + b];
      row[xi] = static_cast<float>((1.0 - ty) * top + ty * bottom);
    }
  }
  return out;
}

FeatureMap densify(const FeatureMap& map) {
  const DenseFeatureView view(map);
  FeatureMap dense;
  dense.grid_width = map.target_width;
  dense.grid_height = map.target_height;
  dense.channels = map.channels;
  dense.stride = 1;
  dense.window = 1;
  dense.target_width = map.target_width;
  dense.target_height = map.target_height;
  dense.xs.resize(static_cast<std::size_t>(map.target_width));
  dense.ys.resize(static_cast<std::size_t>(map.target_height));
  for (int i = 0; i < map.target_width; ++i) dense.xs[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < map.target_height; ++i) dense.ys[static_cast<std::size_t>(i)] = i;
  dense.values.resize(static_cast<std::size_t>(dense.grid_width) * dense.grid_height * dense.channels);
  for (int y = 0; y < dense.grid_height; ++y) {
    for (int x = 0; x < dense.grid_width; ++x) view.sample(x, y, dense.cell(x, y));
  }
  return dense;
}

namespace {

constexpr char kMapMagic[8] = {'P', 'S', 'E', 'G', 'F', 'M', 'A', 'P'};
constexpr std::uint32_t kMapVersion = 1;
constexpr std::uint32_t kDtypeFloat32 = 1;

template <typename V>
void write_pod(std::ostream& out, V v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V read_pod(std::istream& in) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (!in) throw FormatError("feature map file truncated");
  return v;
}

}  // namespace

void save_feature_map(const std::filesystem::path& path, const FeatureMap& map) {
  map.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMapMagic, sizeof(kMapMagic));
  write_pod<std::uint32_t>(out, kMapVersion);
  for (int v : {map.grid_width, map.grid_height, map.channels, map.stride, map.window, map.origin_x, map.origin_y,
                map.target_width, map.target_height}) {
    write_pod<std::int32_t>(out, v);
  }
  write_pod<std::uint32_t>(out, kDtypeFloat32);
  for (int v : map.xs) write_pod<std::int32_t>(out, v);
  for (int v : map.ys) write_pod<std::int32_t>(out, v);
  out.write(reinterpret_cast<const char*>(map.values.data()), static_cast<std::streamsize>(map.values.size() * sizeof(float)));
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMapMagic, sizeof(magic)) != 0) throw FormatError(path.string() + " is not a feature map");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kMapVersion) throw FormatError("unsupported feature map version " + std::to_string(version));
  FeatureMap m;
  m.grid_width = read_pod<std::int32_t>(in);
  m.grid_height = read_pod<std::int32_t>(in);
  m.channels = read_pod<std::int32_t>(in);
  m.stride = read_pod<std::int32_t>(in);
  m.window = read_pod<std::int32_t>(in);
  m.origin_x = read_pod<std::int32_t>(in);
  m.origin_y = read_pod<std::int32_t>(in);
  m.target_width = read_pod<std::int32_t>(in);
  m.target_height = read_pod<std::int32_t>(in);
  if (read_pod<std::uint32_t>(in) != kDtypeFloat32) throw FormatError("unsupported feature map dtype");
  if (m.grid_width < 1 || m.grid_height < 1 || m.channels < 1) throw FormatError("feature map header is invalid");
  m.xs.resize(static_cast<std::size_t>(m.grid_width));
  m.ys.resize(static_cast<std::size_t>(m.grid_height));
  for (auto& v : m.xs) v = read_pod<std::int32_t>(in);
  for (auto& v : m.ys) v = read_pod<std::int32_t>(in);
  m.values.resize(static_cast<std::size_t>(m.grid_width) * m.grid_height * m.channels);
  in.read(reinterpret_cast<char*>(m.values.data()), static_cast<std::streamsize>(m.values.size() * sizeof(float)));
  if (!in) throw FormatError("feature map file truncated");
  return m;
}

}  // namespace pageseg
