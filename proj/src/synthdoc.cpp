#include "pageseg/synthdoc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "pageseg/errors.hpp"
#include "pageseg/image_io.hpp"

namespace pageseg {

namespace {

bool overlaps(const BoundingBox& a, const BoundingBox& b) {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

bool inside(const BoundingBox& b, int w, int h) {
  return b.w > 0 && b.h > 0 && b.x >= 0 && b.y >= 0 && b.x + b.w <= w && b.y + b.h <= h;
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

}  // namespace

void SynthConfig::validate() const {
  if (width < 1 || height < 1) throw ConfigError("page size must be positive");
  if (main_glyph_height <= side_glyph_height) throw ConfigError("main glyph height must exceed side glyph height");
  if (side_glyph_height < 2) throw ConfigError("side glyph height must be >= 2");
  if (line_spacing < 1.0) throw ConfigError("line_spacing must be >= 1");
  if (min_glyph_aspect <= 0 || max_glyph_aspect < min_glyph_aspect) throw ConfigError("invalid glyph aspect range");
  if (min_glyph_gap < 0 || max_glyph_gap < min_glyph_gap) throw ConfigError("invalid glyph gap range");
  if (min_ink < 0 || max_ink < min_ink || max_ink >= paper || paper > 1.0) throw ConfigError("invalid ink/paper levels");
  if (noise_sigma < 0) throw ConfigError("noise_sigma must be >= 0");
  const auto& L = layout;
  if (L.min_top_margin > L.max_top_margin || L.min_gutter > L.max_gutter || L.min_side_width > L.max_side_width ||
      L.min_side_extent <= 0 || L.max_side_extent > 1.0 || L.min_side_extent > L.max_side_extent) {
    throw ConfigError("invalid layout ranges");
  }
  if (main_block.w > 0 || main_block.h > 0) {
    if (!inside(main_block, width, height)) throw ConfigError("main block is out of bounds");
    for (std::size_t i = 0; i < side_blocks.size(); ++i) {
      if (!inside(side_blocks[i], width, height)) throw ConfigError("side block is out of bounds");
      if (overlaps(side_blocks[i], main_block)) throw ConfigError("side block overlaps the main block");
      for (std::size_t j = 0; j < i; ++j) {
        if (overlaps(side_blocks[i], side_blocks[j])) throw ConfigError("side blocks overlap");
      }
    }
  }
}

void draw_layout(const SynthConfig& cfg, Rng& rng, BoundingBox& main_block, std::vector<BoundingBox>& side_blocks) {
  const auto& L = cfg.layout;
  SidePlacement place = L.placement;
  if (place == SidePlacement::kRandom) place = static_cast<SidePlacement>(uniform_int(rng, 0, 2));
  const bool left = place == SidePlacement::kLeft || place == SidePlacement::kBoth;
  const bool right = place == SidePlacement::kRight || place == SidePlacement::kBoth;

  const int top = uniform_int(rng, L.min_top_margin, L.max_top_margin);
  const int bottom = uniform_int(rng, L.min_top_margin, L.max_top_margin);
  const int text_h = cfg.height - top - bottom;
  int x0 = L.outer_margin;
  int x1 = cfg.width - L.outer_margin;
  side_blocks.clear();
  auto side = [&](bool at_left) {
    const int w = uniform_int(rng, L.min_side_width, L.max_side_width);
    const int gutter = uniform_int(rng, L.min_gutter, L.max_gutter);
    const int h = std::max(cfg.side_glyph_height * 2,
                           static_cast<int>(std::lround(text_h * uniform(rng, L.min_side_extent, L.max_side_extent))));
    const int y = top + uniform_int(rng, 0, std::max(0, text_h - h));
    if (at_left) {
      side_blocks.push_back({x0, y, w, h});
      x0 += w + gutter;
    } else {
      side_blocks.push_back({x1 - w, y, w, h});
      x1 -= w + gutter;
    }
  };
  if (left) side(true);
  if (right) side(false);
  if (x1 - x0 < 2 * cfg.main_glyph_height || text_h < 2 * cfg.main_glyph_height) {
    throw ConfigError("page too small for the drawn layout");
  }
  main_block = {x0, top, x1 - x0, text_h};
}

namespace {

// Fills text lines of blob glyphs into block, painting ink and labels.
void render_block(const SynthConfig& cfg, Rng& rng, const BoundingBox& block, int glyph_h, PixelLabel label,
                  Grid<float>& ink, PageSegmentation& labels) {
  const double pitch = glyph_h * cfg.line_spacing;
  for (double line_top = block.y; line_top + glyph_h <= block.y + block.h; line_top += pitch) {
    double x = block.x;
    while (true) {
      const int h = std::max(2, static_cast<int>(std::lround(glyph_h * uniform(rng, 0.85, 1.15))));
      const int w = std::max(2, static_cast<int>(std::lround(h * uniform(rng, cfg.min_glyph_aspect, cfg.max_glyph_aspect))));
      if (x + w > block.x + block.w) break;
      const int gy = static_cast<int>(std::lround(line_top)) + (glyph_h - std::min(h, glyph_h)) +
                     uniform_int(rng, -1, 1);
      const int gx = static_cast<int>(std::lround(x));
      const float level = static_cast<float>(uniform(rng, cfg.min_ink, cfg.max_ink));
      const bool ellipse = uniform_int(rng, 0, 2) != 0;
      const double cx = (w - 1) / 2.0;
      const double cy = (h - 1) / 2.0;
      for (int dy = 0; dy < h; ++dy) {
        const int py = std::clamp(gy + dy, block.y, block.y + block.h - 1);
        for (int dx = 0; dx < w; ++dx) {
          if (ellipse) {
            const double ex = (dx - cx) / (w / 2.0);
            const double ey = (dy - cy) / (h / 2.0);
            if (ex * ex + ey * ey > 1.0) continue;
          }
          const int px = gx + dx;
          ink(px, py) = std::min(ink(px, py), level);
          labels(px, py) = static_cast<std::uint8_t>(label);
        }
      }
      x += w + glyph_h * uniform(rng, cfg.min_glyph_gap, cfg.max_glyph_gap);
      if (uniform(rng, 0.0, 1.0) < cfg.word_gap_probability) x += glyph_h * cfg.word_gap;
    }
  }
}

}  // namespace

SynthPage generate_page(const SynthConfig& cfg, Rng& rng) {
  cfg.validate();
  SynthPage page;
  if (cfg.main_block.w > 0 && cfg.main_block.h > 0) {
    page.main_block = cfg.main_block;
    page.side_blocks = cfg.side_blocks;
  } else {
    draw_layout(cfg, rng, page.main_block, page.side_blocks);
  }
  Grid<float> ink(cfg.width, cfg.height, 2.0f);  // 2 marks unpainted
  page.labels = PageSegmentation(cfg.width, cfg.height);
  render_block(cfg, rng, page.main_block, cfg.main_glyph_height, PixelLabel::kMainText, ink, page.labels);
  for (const auto& b : page.side_blocks) {
    render_block(cfg, rng, b, cfg.side_glyph_height, PixelLabel::kSideText, ink, page.labels);
  }
  page.image.pixels = Grid<float>(cfg.width, cfg.height);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
  for (std::size_t i = 0; i < ink.size(); ++i) {
    const double base = ink.data()[i] > 1.0f ? cfg.paper : ink.data()[i];
    const double v = std::clamp(base + (cfg.noise_sigma > 0 ? noise(rng) : 0.0), 0.0, 1.0);
    // 8-bit quantization so a page written to disk reloads identically.
    page.image.pixels.data()[i] = static_cast<float>(std::lround(v * 255.0) / 255.0);
  }
  return page;
}

std::string synth_page_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "synth_%03d", index);
  return buf;
}

std::vector<SynthPage> generate_corpus(const SynthConfig& cfg, int n_pages, Rng& rng) {
  if (n_pages < 1) throw ConfigError("n_pages must be >= 1");
  std::vector<SynthPage> pages;
  pages.reserve(static_cast<std::size_t>(n_pages));
  SynthConfig page_cfg = cfg;
  page_cfg.main_block = {};
  page_cfg.side_blocks.clear();
  for (int i = 0; i < n_pages; ++i) {
    Rng page_rng(rng());
    pages.push_back(generate_page(page_cfg, page_rng));
    pages.back().image.source_id = synth_page_id(i);
  }
  return pages;
}

void write_dataset(const std::filesystem::path& root, const std::vector<SynthPage>& pages) {
  std::filesystem::create_directories(root / "images");
  std::filesystem::create_directories(root / "labels");
  for (const auto& p : pages) {
    Grid<std::uint8_t> gray(p.image.width(), p.image.height());
    for (std::size_t i = 0; i < gray.size(); ++i) {
      gray.data()[i] = static_cast<std::uint8_t>(std::lround(p.image.pixels.data()[i] * 255.0f));
    }
    write_gray_png(root / "images" / (p.image.source_id + ".png"), gray);
    write_indexed_png(root / "labels" / (p.image.source_id + ".png"), p.labels, label_palette());
  }
}

}  // namespace pageseg
