#include <doctest.h>

#include <algorithm>

#include "pageseg/errors.hpp"
#include "pageseg/image_io.hpp"
#include "pageseg/synthdoc.hpp"
#include "test_support.hpp"

using namespace pageseg;

namespace {

PatchGeometry random_patch_in(const BoundingBox& b, int size, Rng& rng) {
  std::uniform_int_distribution<int> dx(b.x, b.x + b.w - size);
  std::uniform_int_distribution<int> dy(b.y, b.y + b.h - size);
  return {dx(rng), dy(rng), size};
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(q * (v.size() - 1))];
}

}  // namespace

TEST_CASE("fixed seed gives identical pages") {
  SynthConfig cfg;
  Rng a(11), b(11);
  const SynthPage p = generate_page(cfg, a);
  const SynthPage q = generate_page(cfg, b);
  CHECK(p.image.pixels == q.image.pixels);
  CHECK(p.labels == q.labels);
  CHECK(p.main_block == q.main_block);
  Rng c(12);
  CHECK_FALSE(generate_page(cfg, c).image.pixels == p.image.pixels);
}

TEST_CASE("ink pixels carry the label of their block") {
  SynthConfig cfg;
  Rng rng(1);
  const SynthPage p = generate_page(cfg, rng);
  CHECK(p.image.width() == cfg.width);
  CHECK(p.labels.width() == cfg.width);
  REQUIRE_FALSE(p.side_blocks.empty());
  auto in = [](const BoundingBox& b, int x, int y) { return x >= b.x && y >= b.y && x < b.x + b.w && y < b.y + b.h; };
  long main_px = 0, side_px = 0;
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) {
      const auto l = p.labels(x, y);
      if (l == 1) {
        REQUIRE(in(p.main_block, x, y));
        ++main_px;
      } else if (l == 2) {
        REQUIRE(std::any_of(p.side_blocks.begin(), p.side_blocks.end(), [&](auto& b) { return in(b, x, y); }));
        ++side_px;
      } else {
        // Unlabeled pixels are paper plus noise.
        REQUIRE(p.image.pixels(x, y) > cfg.max_ink + 0.2);
      }
    }
  CHECK(main_px > 0);
  CHECK(side_px > 0);
}

TEST_CASE("main-block glyph height is about 28 px") {
  SynthConfig cfg;
  Rng rng(2);
  const SynthPage p = generate_page(cfg, rng);
  const BinaryImage bin = binarize(p.image);
  const BoundingBox& m = p.main_block;
  // Restrict to whole lines so clipping at the block border does not bias it.
  const auto stats = component_stats(bin, {m.x, m.y, std::min(m.w, m.h)});
  MESSAGE("main avg height " << stats.avg_height);
  CHECK(stats.avg_height == doctest::Approx(28.0).epsilon(0.2));
}

TEST_CASE("binarization recovers at least 99% of ink at default noise") {
  SynthConfig cfg;
  Rng rng(3);
  for (int t = 0; t < 3; ++t) {
    const SynthPage p = generate_page(cfg, rng);
    const BinaryImage bin = binarize(p.image);
    long ink = 0, hit = 0;
    for (std::size_t i = 0; i < bin.size(); ++i) {
      if (p.labels.data()[i] == 0) continue;
      ++ink;
      hit += bin.data()[i] != 0;
    }
    CHECK(static_cast<double>(hit) / ink >= 0.99);
  }
}

TEST_CASE("main and margin patch statistics separate") {
  SynthConfig cfg;
  cfg.layout.placement = SidePlacement::kBoth;
  Rng rng(4);
  std::vector<double> main_h, side_h, s1;
  constexpr int kSize = 60;
  int pages = 0;
  while (s1.size() < 1000 && pages < 20) {
    const SynthPage p = generate_page(cfg, rng);
    ++pages;
    const BinaryImage bin = binarize(p.image);
    for (int i = 0; i < 100; ++i) {
      const auto gm = random_patch_in(p.main_block, kSize, rng);
      const auto& sb = p.side_blocks[static_cast<std::size_t>(i) % p.side_blocks.size()];
      if (sb.h < kSize) continue;
      const auto gs = random_patch_in(sb, kSize, rng);
      const auto a = component_stats(bin, gm);
      const auto b = component_stats(bin, gs);
      if (a.component_count > 0) main_h.push_back(a.avg_height);
      if (b.component_count > 0) side_h.push_back(b.avg_height);
      s1.push_back(similarity_s1(a, b));
    }
  }
  REQUIRE(s1.size() >= 1000);
  double mean_s1 = 0;
  for (double v : s1) mean_s1 += v;
  mean_s1 /= static_cast<double>(s1.size());
  MESSAGE("mean s1 " << mean_s1 << ", side IQR top " << quantile(side_h, 0.75) << ", main IQR bottom "
                     << quantile(main_h, 0.25));
  CHECK(mean_s1 < 0.5);
  CHECK(quantile(side_h, 0.75) < quantile(main_h, 0.25));
}

TEST_CASE("corpus has n pages with varied layouts and named ids") {
  SynthConfig cfg;
  Rng rng(5);
  const auto pages = generate_corpus(cfg, 4, rng);
  REQUIRE(pages.size() == 4);
  CHECK(pages[0].image.source_id == "synth_000");
  CHECK(pages[3].image.source_id == "synth_003");
  bool varied = false;
  for (const auto& p : pages) {
    CHECK(p.labels.width() == p.image.width());
    CHECK(p.labels.height() == p.image.height());
    varied |= !(p.main_block == pages[0].main_block);
  }
  CHECK(varied);
  Rng again(5);
  CHECK(generate_corpus(cfg, 4, again)[2].image.pixels == pages[2].image.pixels);
  CHECK_THROWS_AS(generate_corpus(cfg, 0, rng), ConfigError);
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  cfg.main_glyph_height = 10;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  SynthConfig boxes;
  boxes.main_block = {200, 100, 400, 600};
  boxes.side_blocks = {{30, 100, 200, 300}};
  CHECK_THROWS_AS(boxes.validate(), ConfigError);
  boxes.side_blocks = {{30, 100, 150, 300}};
  CHECK_NOTHROW(boxes.validate());
  boxes.side_blocks.push_back({30, 350, 150, 600});
  CHECK_THROWS_AS(boxes.validate(), ConfigError);  // out of bounds
  boxes.side_blocks = {{30, 100, 150, 300}, {40, 200, 100, 100}};
  CHECK_THROWS_AS(boxes.validate(), ConfigError);  // sides overlap

  Rng rng(1);
  boxes.side_blocks = {{30, 100, 150, 300}};
  const SynthPage p = generate_page(boxes, rng);
  CHECK(p.main_block == boxes.main_block);
}

TEST_CASE("dataset on disk round-trips images and labels") {
  testing::TempDir dir("synth");
  SynthConfig cfg;
  Rng rng(6);
  const auto pages = generate_corpus(cfg, 2, rng);
  write_dataset(dir.path(), pages);
  const auto img = load_image(dir.path() / "images" / "synth_001.png");
  CHECK(img.pixels == pages[1].image.pixels);
  CHECK(read_indexed_png(dir.path() / "labels" / "synth_001.png") == pages[1].labels);
}
