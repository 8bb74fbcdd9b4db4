#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pageseg/errors.hpp"
#include "pageseg/segment.hpp"
#include "pca_oracle.hpp"
#include "test_support.hpp"

using namespace pageseg;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Random grid map whose features grow with a per-cell ink level, plus an
// ink image consistent with it.
struct InkScene {
  FeatureMap map;
  BinaryImage bin;
};

InkScene ink_scene(std::uint64_t seed) {
  InkScene s;
  FeatureMap& m = s.map;
  m.grid_width = 6;
  m.grid_height = 5;
  m.channels = 8;
  m.window = 10;
  m.stride = 10;
  m.target_width = 60;
  m.target_height = 50;
  for (int i = 0; i < 6; ++i) m.xs.push_back(10 * i);
  for (int i = 0; i < 5; ++i) m.ys.push_back(10 * i);
  m.values.resize(6 * 5 * 8);
  s.bin = BinaryImage(60, 50);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.05f);
  std::vector<float> dir(8);
  for (auto& d : dir) d = noise(rng) * 10.0f;
  for (int gy = 0; gy < 5; ++gy)
    for (int gx = 0; gx < 6; ++gx) {
      const bool inked = gx >= 2;
      const float level = inked ? 1.0f : 0.0f;
      auto cell = m.cell(gx, gy);
      for (int c = 0; c < 8; ++c) cell[c] = level * dir[c] + noise(rng);
      if (inked)
        for (int y = 0; y < 10; ++y)
          for (int x = 0; x < 10; x += 2) s.bin(10 * gx + x, 10 * gy + y) = 1;
    }
  return s;
}

Grid<float> filled(int w, int h, float v) { return Grid<float>(w, h, v); }

}  // namespace

TEST_CASE("PCA matches a brute-force covariance eigendecomposition on 50x8 samples") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> rows(50 * 8);
    std::vector<double> scale = {5, 3, 2, 1.5, 1, 0.7, 0.4, 0.2};
    for (int r = 0; r < 50; ++r)
      for (int j = 0; j < 8; ++j) rows[r * 8 + j] = g(rng) * scale[j] + 0.3 * g(rng) * j;
    std::vector<float> rows_f(rows.begin(), rows.end());
    std::vector<double> rows_back(rows_f.begin(), rows_f.end());
    const auto oracle = testing::jacobi_eigen(testing::brute_covariance(rows_back, 50, 8));
    const PCAModel pca = fit_pca(rows_f, 50, 8, 8);
    for (int i = 0; i < 8; ++i) {
      CHECK(pca.explained_variance[i] == doctest::Approx(oracle.values[i]).epsilon(1e-5));
      double dot = 0.0;
      for (int j = 0; j < 8; ++j) dot += pca.component(i)[j] * oracle.vectors[i][j];
      CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
}

TEST_CASE("components are orthonormal and variances non-increasing") {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<float> rows(200 * 12);
  for (auto& v : rows) v = g(rng);
  const PCAModel pca = fit_pca(rows, 200, 12, 5);
  for (int a = 0; a < 5; ++a) {
    if (a > 0) CHECK(pca.explained_variance[a] <= pca.explained_variance[a - 1]);
    for (int b = 0; b < 5; ++b) {
      double dot = 0.0;
      for (int j = 0; j < 12; ++j) dot += pca.component(a)[j] * pca.component(b)[j];
      CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("collinear data gives one principal axis and a degeneracy flag") {
  std::vector<float> rows;
  for (int i = 0; i < 20; ++i) {
    rows.push_back(static_cast<float>(i));
    rows.push_back(static_cast<float>(2 * i));
  }
  const PCAModel pca = fit_pca(rows, 20, 2, 2);
  CHECK(std::abs(pca.component(0)[0]) == doctest::Approx(1.0 / std::sqrt(5.0)));
  CHECK(std::abs(pca.component(0)[1]) == doctest::Approx(2.0 / std::sqrt(5.0)));
  CHECK(pca.explained_variance[1] == doctest::Approx(0.0).scale(1.0));
  CHECK(pca.degenerate);
  CHECK(pca.k() == 2);
}

TEST_CASE("isotropic cloud has roughly equal variances") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> rows(1000 * 3);
  for (auto& v : rows) v = g(rng);
  const std::vector<float> rows_f(rows.begin(), rows.end());
  const PCAModel pca = fit_pca(rows_f, 1000, 3, 3);
  const auto oracle = testing::jacobi_eigen(testing::brute_covariance({rows_f.begin(), rows_f.end()}, 1000, 3));
  for (int i = 0; i < 3; ++i) {
    CHECK(pca.explained_variance[i] == doctest::Approx(oracle.values[i]).epsilon(1e-5));
    CHECK(pca.explained_variance[i] == doctest::Approx(1.0).epsilon(0.15));
  }
}

TEST_CASE("fit_pca rejects too few samples and oversize k") {
  const std::vector<float> one = {1, 2, 3};
  CHECK_THROWS_AS(fit_pca(one, 1, 3, 2), UndefinedStatisticError);
  const std::vector<float> rows(30, 1.0f);
  CHECK_THROWS_AS(fit_pca(rows, 10, 3, 4), ConfigError);
}

TEST_CASE("map fit covers every pixel when small and is seeded when subsampled") {
  const auto scene = ink_scene(1);
  const PCAModel full = fit_pca(scene.map, {3, 100000, 0});
  const FeatureMap dense = densify(scene.map);
  const PCAModel direct = fit_pca(dense.values, dense.grid_width * dense.grid_height, 8, 3);
  for (int i = 0; i < 3; ++i) CHECK(full.explained_variance[i] == doctest::Approx(direct.explained_variance[i]));

  const PCAModel s1 = fit_pca(scene.map, {3, 500, 7});
  const PCAModel s2 = fit_pca(scene.map, {3, 500, 7});
  CHECK(s1.components == s2.components);
  CHECK(s1.explained_variance == s2.explained_variance);
}

TEST_CASE("projection of the mean and of mean + component") {
  const auto scene = ink_scene(2);
  const PCAModel pca = fit_pca(scene.map, {3, 0, 0});
  std::vector<float> v(pca.mean.begin(), pca.mean.end());
  for (int i = 0; i < 3; ++i) CHECK(pca.project(i, v) == doctest::Approx(0.0).scale(1.0));
  for (int i = 0; i < 3; ++i) {
    std::vector<float> u(8);
    for (int j = 0; j < 8; ++j) u[j] = static_cast<float>(pca.mean[j] + pca.component(i)[j]);
    for (int k = 0; k < 3; ++k) CHECK(pca.project(k, u) == doctest::Approx(i == k ? 1.0 : 0.0).epsilon(1e-5).scale(1.0));
  }
  const auto comps = project(pca, scene.map);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0].width() == 60);
  auto variance = [](const Grid<float>& g) {
    double m = 0, s = 0;
    for (float x : g.data()) m += x;
    m /= g.size();
    for (float x : g.data()) s += (x - m) * (x - m);
    return s / g.size();
  };
  CHECK(variance(comps[0]) >= variance(comps[1]));
  CHECK(variance(comps[1]) >= variance(comps[2]));

  // Projecting cells then upsampling equals projecting interpolated features.
  const DenseFeatureView view(scene.map);
  std::vector<float> f(8);
  for (int y = 0; y < 50; y += 7)
    for (int x = 0; x < 60; x += 5) {
      view.sample(x, y, f);
      CHECK(comps[0](x, y) == doctest::Approx(pca.project(0, f)).epsilon(1e-4).scale(1.0));
    }

  FeatureMap wrong = scene.map;
  wrong.channels = 4;
  wrong.values.resize(6 * 5 * 4);
  CHECK_THROWS_AS(project(pca, wrong), ShapeError);
}

TEST_CASE("sign canonicalization makes low-ink positions score high and ignores input signs") {
  const auto scene = ink_scene(3);
  const PCAModel raw = fit_pca(scene.map, {3, 0, 0});
  const PCAModel canon = canonicalize_signs(raw, scene.map, scene.bin);
  CHECK_FALSE(canon.orientation_unresolved);
  const auto comps = project(canon, scene.map);
  double low = 0, high = 0;
  int nl = 0, nh = 0;
  for (int gy = 0; gy < 5; ++gy)
    for (int gx = 0; gx < 6; ++gx) {
      const double p = canon.project(0, scene.map.cell(gx, gy));
      if (gx < 2) {
        low += p;
        ++nl;
      } else {
        high += p;
        ++nh;
      }
    }
  CHECK(low / nl >= high / nh);

  for (int i = 0; i < 3; ++i) {
    PCAModel flipped = raw;
    flipped.flip(i);
    const PCAModel again = canonicalize_signs(flipped, scene.map, scene.bin);
    CHECK(again.components == canon.components);
  }
  const PCAModel fixed = canonicalize_signs(canon, scene.map, scene.bin);
  CHECK(fixed.components == canon.components);

  BinaryImage full(60, 50, 1);
  const PCAModel unresolved = canonicalize_signs(raw, scene.map, full);
  CHECK(unresolved.orientation_unresolved);
  CHECK(unresolved.components == raw.components);
}

TEST_CASE("threshold examples and monotonicity") {
  std::mt19937_64 rng(8);
  std::normal_distribution<float> g(0.0f, 1.0f);
  Grid<float> a(20, 15), b(20, 15);
  for (auto& v : a.data()) v = g(rng);
  for (auto& v : b.data()) v = g(rng);
  SegmentationConfig cfg;
  cfg.threshold_mode = ThresholdMode::kFixed;
  cfg.t1 = cfg.t2 = kInf;
  const auto all = threshold_main_text(a, b, cfg).mask;
  CHECK(std::all_of(all.data().begin(), all.data().end(), [](auto v) { return v == 1; }));
  cfg.t1 = -kInf;
  const auto none = threshold_main_text(a, b, cfg).mask;
  CHECK(std::all_of(none.data().begin(), none.data().end(), [](auto v) { return v == 0; }));

  for (int trial = 0; trial < 50; ++trial) {
    cfg.t1 = g(rng);
    cfg.t2 = g(rng);
    const auto base = threshold_main_text(a, b, cfg).mask;
    SegmentationConfig up = cfg;
    up.t1 += std::abs(g(rng));
    up.t2 += std::abs(g(rng));
    const auto more = threshold_main_text(a, b, up).mask;
    for (std::size_t i = 0; i < base.size(); ++i) REQUIRE((base.data()[i] == 0 || more.data()[i] == 1));
  }
  CHECK_THROWS_AS(threshold_main_text(a, Grid<float>(3, 3), cfg), ShapeError);
}

TEST_CASE("auto thresholds separate bimodal components") {
  Grid<float> pc1(40, 10), pc2(40, 10, -1.0f);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 40; ++x) pc1(x, y) = x < 25 ? -2.0f + 0.01f * y : 3.0f + 0.01f * x;
  SegmentationConfig cfg;
  pc2(39, 9) = 1.0f;
  const auto r = threshold_main_text(pc1, pc2, cfg);
  CHECK(r.t1 > -2.0);
  CHECK(r.t1 < 3.0);
  CHECK(r.mask(0, 0) == 1);
  CHECK(r.mask(30, 0) == 0);
  CHECK(r.mask(39, 9) == 0);
}

TEST_CASE("label assignment partitions the foreground") {
  MainTextMask mask(10, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) mask(x, y) = 1;
  BinaryImage bin(10, 4);
  bin(1, 1) = bin(8, 2) = bin(4, 3) = bin(5, 3) = 1;
  const auto seg = assign_labels(mask, bin);
  CHECK(seg(1, 1) == 1);
  CHECK(seg(4, 3) == 1);
  CHECK(seg(8, 2) == 2);
  CHECK(seg(5, 3) == 2);
  CHECK(seg(0, 0) == 0);
  for (std::size_t i = 0; i < seg.size(); ++i) CHECK((seg.data()[i] != 0) == (bin.data()[i] != 0));
  CHECK(std::all_of(assign_labels(mask, BinaryImage(10, 4)).data().begin(),
                    assign_labels(mask, BinaryImage(10, 4)).data().end(), [](auto v) { return v == 0; }));
  CHECK_THROWS_AS(assign_labels(mask, BinaryImage(3, 3)), ShapeError);
}

TEST_CASE("PCA-RGB visualization normalizes each channel") {
  std::vector<Grid<float>> comps = {filled(6, 4, 1.0f), filled(6, 4, 0.0f), filled(6, 4, -2.0f)};
  comps[0](0, 0) = -5.0f;
  comps[0](5, 3) = 7.0f;
  const RgbImage img = visualize_pca_rgb(comps);
  CHECK(img.width == 6);
  CHECK(img.height == 4);
  CHECK(img.rgb[0] == 0);
  CHECK(img.rgb[(3 * 6 + 5) * 3] == 255);
  for (std::size_t i = 0; i < 24; ++i) {
    CHECK(img.rgb[i * 3 + 1] == 128);
    CHECK(img.rgb[i * 3 + 2] == 128);
  }
  std::vector<Grid<float>> two = {filled(2, 2, 0), filled(2, 2, 0)};
  CHECK_THROWS_AS(visualize_pca_rgb(two), ConfigError);
}

TEST_CASE("segmentation config requires two components") {
  SegmentationConfig c;
  c.k = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

namespace {

// Left three columns hold 3 px glyphs, right three 8 px glyphs; features
// follow glyph height along a random direction.
InkScene glyph_scene(std::uint64_t seed) {
  InkScene s = ink_scene(seed);
  s.bin = BinaryImage(60, 50);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.05f);
  std::vector<float> dir(8);
  for (auto& d : dir) d = noise(rng) * 20.0f;
  for (int gy = 0; gy < 5; ++gy)
    for (int gx = 0; gx < 6; ++gx) {
      const int h = gx < 3 ? 3 : 8;
      for (int y = 1; y < 1 + h; ++y)
        for (int x = 2; x < 6; ++x) s.bin(10 * gx + x, 10 * gy + y) = 1;
      auto cell = s.map.cell(gx, gy);
      for (int c = 0; c < 8; ++c) cell[c] = static_cast<float>(h) * dir[c] + noise(rng);
    }
  return s;
}

}  // namespace

TEST_CASE("glyph-size orientation puts larger glyphs lower and ignores input signs") {
  const auto scene = glyph_scene(9);
  const PCAModel raw = fit_pca(scene.map, {3, 0, 0});
  const PCAModel canon = canonicalize_signs_by_glyph_size(raw, scene.map, scene.bin);
  CHECK_FALSE(canon.orientation_unresolved);
  double small = 0, large = 0;
  for (int gy = 0; gy < 5; ++gy)
    for (int gx = 0; gx < 6; ++gx) (gx < 3 ? small : large) += canon.project(0, scene.map.cell(gx, gy));
  CHECK(large < small);
  for (int i = 0; i < 3; ++i) {
    PCAModel flipped = raw;
    flipped.flip(i);
    CHECK(canonicalize_signs_by_glyph_size(flipped, scene.map, scene.bin).components == canon.components);
  }
  CHECK(canonicalize_signs_by_glyph_size(canon, scene.map, scene.bin).components == canon.components);
  CHECK(canonicalize_signs_by_glyph_size(raw, scene.map, BinaryImage(60, 50)).orientation_unresolved);

  SegmentationConfig cfg;
  CHECK(orient_components(raw, scene.map, scene.bin, cfg).components == canon.components);
  cfg.orientation = OrientationAnchor::kInkDensity;
  CHECK(orient_components(raw, scene.map, scene.bin, cfg).components ==
        canonicalize_signs(raw, scene.map, scene.bin).components);
}

TEST_CASE("negating every feature leaves the final mask unchanged") {
  for (auto anchor : {OrientationAnchor::kInkDensity, OrientationAnchor::kGlyphSize}) {
    const auto scene = anchor == OrientationAnchor::kInkDensity ? ink_scene(4) : glyph_scene(4);
    FeatureMap neg = scene.map;
    for (auto& v : neg.values) v = -v;
    SegmentationConfig cfg;
    cfg.orientation = anchor;
    auto mask_of = [&](const FeatureMap& m) {
      const PCAModel p = orient_components(fit_pca(m, {3, 0, 0}), m, scene.bin, cfg);
      CHECK_FALSE(p.orientation_unresolved);
      const auto c = project(p, m);
      return threshold_main_text(c[0], c[1], cfg, &scene.bin).mask;
    };
    CHECK(mask_of(scene.map) == mask_of(neg));
  }
}

TEST_CASE("foreground threshold population ignores background values") {
  // Background sits far below both text modes; only the foreground histogram
  // places T1 between them.
  Grid<float> pc1(30, 1), pc2(30, 1, -1.0f);
  pc2(29, 0) = 5.0f;
  BinaryImage bin(30, 1);
  for (int x = 0; x < 30; ++x) {
    if (x < 20) {
      pc1(x, 0) = -50.0f;
    } else {
      bin(x, 0) = 1;
      pc1(x, 0) = x < 25 ? 0.0f : 1.0f;
    }
  }
  SegmentationConfig cfg;
  const auto fg = threshold_main_text(pc1, pc2, cfg, &bin);
  CHECK(fg.t1 > 0.0);
  CHECK(fg.t1 < 1.0);
  CHECK(fg.mask(22, 0) == 1);
  CHECK(fg.mask(27, 0) == 0);
  CHECK(fg.mask(29, 0) == 0);
  cfg.threshold_population = ThresholdPopulation::kAll;
  const auto all = threshold_main_text(pc1, pc2, cfg, &bin);
  CHECK(all.t1 < 0.0);
  CHECK(all.mask(22, 0) == 0);
  // Without ink the foreground mode falls back to all pixels.
  cfg.threshold_population = ThresholdPopulation::kForeground;
  const BinaryImage none(30, 1);
  CHECK(threshold_main_text(pc1, pc2, cfg, &none).t1 == all.t1);
}
