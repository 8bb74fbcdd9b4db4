#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pageseg/imaging.hpp"
#include "pageseg/pairgen.hpp"

namespace pageseg {

enum class SidePlacement { kLeft, kRight, kBoth, kRandom };

/// Ranges from which page layouts are drawn when no explicit blocks are set.
struct SynthLayout {
  SidePlacement placement = SidePlacement::kRandom;
  int outer_margin = 30;
  int min_top_margin = 60;
  int max_top_margin = 100;
  int min_gutter = 40;
  int max_gutter = 60;
  int min_side_width = 110;
  int max_side_width = 170;
  /// Fraction of the text-area height covered by each side block.
  double min_side_extent = 0.5;
  double max_side_extent = 1.0;
};

struct SynthConfig {
  int width = 720;
  int height = 900;
  /// Explicit geometry; used when main_block has positive size.
  BoundingBox main_block;
  std::vector<BoundingBox> side_blocks;
  SynthLayout layout;

  int main_glyph_height = 28;
  int side_glyph_height = 10;
  double line_spacing = 1.5;      // line pitch in glyph heights
  double min_glyph_aspect = 0.4;  // glyph width / height
  double max_glyph_aspect = 1.0;
  double min_glyph_gap = 0.15;    // gap in glyph heights
  double max_glyph_gap = 0.5;
  double word_gap_probability = 0.2;
  double word_gap = 1.0;
  double min_ink = 0.05;
  double max_ink = 0.25;
  double paper = 0.92;
  double noise_sigma = 0.03;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SynthPage {
  DocumentImage image;
  PageSegmentation labels;
  BoundingBox main_block;
  std::vector<BoundingBox> side_blocks;
};

/// Draws a block layout from cfg.layout.
void draw_layout(const SynthConfig& cfg, Rng& rng, BoundingBox& main_block, std::vector<BoundingBox>& side_blocks);

SynthPage generate_page(const SynthConfig& cfg, Rng& rng);

/// Pages named synth_000, synth_001, ...; each with its own layout draw.
std::vector<SynthPage> generate_corpus(const SynthConfig& cfg, int n_pages, Rng& rng);

std::string synth_page_id(int index);

/// Writes images/<id>.png (8-bit gray) and labels/<id>.png (indexed 0/1/2).
void write_dataset(const std::filesystem::path& root, const std::vector<SynthPage>& pages);

}  // namespace pageseg
