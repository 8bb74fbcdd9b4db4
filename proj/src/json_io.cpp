#include "pageseg/json_io.hpp"

#include <nlohmann/json.hpp>

namespace pageseg {

using nlohmann::json;

void to_json(json& j, const PatchGeometry& g) { j = json{{"x", g.x}, {"y", g.y}, {"size", g.size}}; }

void from_json(const json& j, PatchGeometry& g) {
  j.at("x").get_to(g.x);
  j.at("y").get_to(g.y);
  j.at("size").get_to(g.size);
}

void to_json(json& j, const ComponentStats& s) {
  j = json{{"avg_height", s.avg_height},
           {"avg_width", s.avg_width},
           {"component_count", s.component_count},
           {"foreground_count", s.foreground_count}};
}

void from_json(const json& j, ComponentStats& s) {
  j.at("avg_height").get_to(s.avg_height);
  j.at("avg_width").get_to(s.avg_width);
  j.at("component_count").get_to(s.component_count);
  j.at("foreground_count").get_to(s.foreground_count);
}

void to_json(json& j, const BinarizeOptions& o) {
  j = json{{"method", o.method == BinarizationMethod::kOtsu ? "otsu" : "sauvola"},
           {"sauvola_window", o.sauvola_window},
           {"sauvola_k", o.sauvola_k}};
}

void from_json(const json& j, BinarizeOptions& o) {
  const std::string m = j.value("method", std::string("otsu"));
  if (m == "otsu") {
    o.method = BinarizationMethod::kOtsu;
  } else if (m == "sauvola") {
    o.method = BinarizationMethod::kSauvola;
  } else {
    throw ConfigError("unknown binarization method '" + m + "'");
  }
  o.sauvola_window = j.value("sauvola_window", o.sauvola_window);
  o.sauvola_k = j.value("sauvola_k", o.sauvola_k);
}

void to_json(json& j, const SamplerConfig& c) {
  j = json{{"patch_size", c.patch_size},
           {"s_threshold", c.s_threshold},
           {"bg_foreground_ratio", c.bg_foreground_ratio},
           {"perturb_fraction", c.perturb_fraction},
           {"max_rejections", c.max_rejections},
           {"rng_seed", c.rng_seed},
           {"min_area", c.min_area},
           {"binarize", c.binarize}};
}

void from_json(const json& j, SamplerConfig& c) {
  c.patch_size = j.value("patch_size", c.patch_size);
  c.s_threshold = j.value("s_threshold", c.s_threshold);
  c.bg_foreground_ratio = j.value("bg_foreground_ratio", c.bg_foreground_ratio);
  c.perturb_fraction = j.value("perturb_fraction", c.perturb_fraction);
  c.max_rejections = j.value("max_rejections", c.max_rejections);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.min_area = j.value("min_area", c.min_area);
  if (j.contains("binarize")) c.binarize = j.at("binarize").get<BinarizeOptions>();
}

void to_json(json& j, const ConvSpec& c) {
  j = json{{"filters", c.filters}, {"kernel", c.kernel}, {"stride", c.stride}, {"pad", c.pad}, {"pool", c.pool}};
}

void from_json(const json& j, ConvSpec& c) {
  j.at("filters").get_to(c.filters);
  j.at("kernel").get_to(c.kernel);
  j.at("stride").get_to(c.stride);
  j.at("pad").get_to(c.pad);
  j.at("pool").get_to(c.pool);
}

void to_json(json& j, const Architecture& a) {
  j = json{{"name", a.name},           {"input_size", a.input_size},   {"convs", a.convs},
           {"branch_fc", a.branch_fc}, {"head_fc", a.head_fc},         {"pool_kernel", a.pool_kernel},
           {"pool_stride", a.pool_stride}};
}

void from_json(const json& j, Architecture& a) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "alexnet_like") {
      a = Architecture::alexnet_like(a.input_size);
    } else if (name == "compact") {
      a = Architecture::compact(a.input_size);
    } else {
      throw ConfigError("unknown architecture preset '" + name + "'");
    }
    return;
  }
  a.name = j.value("name", std::string("custom"));
  j.at("input_size").get_to(a.input_size);
  j.at("convs").get_to(a.convs);
  j.at("branch_fc").get_to(a.branch_fc);
  j.at("head_fc").get_to(a.head_fc);
  a.pool_kernel = j.value("pool_kernel", 3);
  a.pool_stride = j.value("pool_stride", 2);
}

void to_json(json& j, const TrainingConfig& c) {
  j = json{{"learning_rate", c.learning_rate}, {"optimizer", "adam"},
           {"beta1", c.beta1},                 {"beta2", c.beta2},
           {"epsilon", c.epsilon},             {"batch_size", c.batch_size},
           {"max_epochs", c.max_epochs},       {"early_stop_patience", c.early_stop_patience},
           {"rng_seed", c.rng_seed}};
}

void from_json(const json& j, TrainingConfig& c) {
  if (j.contains("optimizer") && j.at("optimizer").get<std::string>() != "adam") {
    throw ConfigError("only the adam optimizer is supported");
  }
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
}

void to_json(json& j, const SlidingConfig& c) {
  j = json{{"window", c.window}, {"stride", c.stride}, {"batch", c.batch}, {"cover_edges", c.cover_edges}};
}

void from_json(const json& j, SlidingConfig& c) {
  c.window = j.value("window", c.window);
  c.stride = j.value("stride", c.stride);
  c.batch = j.value("batch", c.batch);
  c.cover_edges = j.value("cover_edges", c.cover_edges);
}

void to_json(json& j, const SegmentationConfig& c) {
  j = json{{"k", c.k},
           {"threshold_mode", c.threshold_mode == ThresholdMode::kAuto ? "auto" : "fixed"},
           {"threshold_population", c.threshold_population == ThresholdPopulation::kForeground ? "foreground" : "all"},
           {"orientation", c.orientation == OrientationAnchor::kGlyphSize ? "glyph_size" : "ink_density"},
           {"t1", c.t1},
           {"t2", c.t2},
           {"pca_max_samples", c.pca_max_samples},
           {"pca_seed", c.pca_seed},
           {"low_ink_ratio", c.low_ink_ratio}};
}

void from_json(const json& j, SegmentationConfig& c) {
  c.k = j.value("k", c.k);
  const std::string mode = j.value("threshold_mode", std::string(c.threshold_mode == ThresholdMode::kAuto ? "auto" : "fixed"));
  if (mode == "auto") {
    c.threshold_mode = ThresholdMode::kAuto;
  } else if (mode == "fixed") {
    c.threshold_mode = ThresholdMode::kFixed;
  } else {
    throw ConfigError("threshold_mode must be 'auto' or 'fixed'");
  }
  if (j.contains("threshold_population")) {
    const std::string pop = j.at("threshold_population").get<std::string>();
    if (pop == "foreground") {
      c.threshold_population = ThresholdPopulation::kForeground;
    } else if (pop == "all") {
      c.threshold_population = ThresholdPopulation::kAll;
    } else {
      throw ConfigError("threshold_population must be 'foreground' or 'all'");
    }
  }
  if (j.contains("orientation")) {
    const std::string anchor = j.at("orientation").get<std::string>();
    if (anchor == "glyph_size") {
      c.orientation = OrientationAnchor::kGlyphSize;
    } else if (anchor == "ink_density") {
      c.orientation = OrientationAnchor::kInkDensity;
    } else {
      throw ConfigError("orientation must be 'glyph_size' or 'ink_density'");
    }
  }
  c.t1 = j.value("t1", c.t1);
  c.t2 = j.value("t2", c.t2);
  c.pca_max_samples = j.value("pca_max_samples", c.pca_max_samples);
  c.pca_seed = j.value("pca_seed", c.pca_seed);
  c.low_ink_ratio = j.value("low_ink_ratio", c.low_ink_ratio);
}

void to_json(json& j, const BoundingBox& b) { j = json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}; }

void from_json(const json& j, BoundingBox& b) {
  j.at("x").get_to(b.x);
  j.at("y").get_to(b.y);
  j.at("w").get_to(b.w);
  j.at("h").get_to(b.h);
}

namespace {

const char* placement_name(SidePlacement p) {
  switch (p) {
    case SidePlacement::kLeft: return "left";
    case SidePlacement::kRight: return "right";
    case SidePlacement::kBoth: return "both";
    case SidePlacement::kRandom: return "random";
  }
  return "random";
}

}  // namespace

void to_json(json& j, const SynthLayout& l) {
  j = json{{"placement", placement_name(l.placement)},
           {"outer_margin", l.outer_margin},
           {"min_top_margin", l.min_top_margin},
           {"max_top_margin", l.max_top_margin},
           {"min_gutter", l.min_gutter},
           {"max_gutter", l.max_gutter},
           {"min_side_width", l.min_side_width},
           {"max_side_width", l.max_side_width},
           {"min_side_extent", l.min_side_extent},
           {"max_side_extent", l.max_side_extent}};
}

void from_json(const json& j, SynthLayout& l) {
  const std::string p = j.value("placement", std::string(placement_name(l.placement)));
  if (p == "left") l.placement = SidePlacement::kLeft;
  else if (p == "right") l.placement = SidePlacement::kRight;
  else if (p == "both") l.placement = SidePlacement::kBoth;
  else if (p == "random") l.placement = SidePlacement::kRandom;
  else throw ConfigError("unknown side placement '" + p + "'");
  l.outer_margin = j.value("outer_margin", l.outer_margin);
  l.min_top_margin = j.value("min_top_margin", l.min_top_margin);
  l.max_top_margin = j.value("max_top_margin", l.max_top_margin);
  l.min_gutter = j.value("min_gutter", l.min_gutter);
  l.max_gutter = j.value("max_gutter", l.max_gutter);
  l.min_side_width = j.value("min_side_width", l.min_side_width);
  l.max_side_width = j.value("max_side_width", l.max_side_width);
  l.min_side_extent = j.value("min_side_extent", l.min_side_extent);
  l.max_side_extent = j.value("max_side_extent", l.max_side_extent);
}

void to_json(json& j, const SynthConfig& c) {
  j = json{{"width", c.width},
           {"height", c.height},
           {"layout", c.layout},
           {"main_glyph_height", c.main_glyph_height},
           {"side_glyph_height", c.side_glyph_height},
           {"line_spacing", c.line_spacing},
           {"min_glyph_aspect", c.min_glyph_aspect},
           {"max_glyph_aspect", c.max_glyph_aspect},
           {"min_glyph_gap", c.min_glyph_gap},
           {"max_glyph_gap", c.max_glyph_gap},
           {"word_gap_probability", c.word_gap_probability},
           {"word_gap", c.word_gap},
           {"min_ink", c.min_ink},
           {"max_ink", c.max_ink},
           {"paper", c.paper},
           {"noise_sigma", c.noise_sigma},
           {"rng_seed", c.rng_seed}};
  if (c.main_block.w > 0) {
    j["main_block"] = c.main_block;
    j["side_blocks"] = c.side_blocks;
  }
}

void from_json(const json& j, SynthConfig& c) {
  c.width = j.value("width", c.width);
  c.height = j.value("height", c.height);
  if (j.contains("layout")) c.layout = j.at("layout").get<SynthLayout>();
  if (j.contains("main_block")) c.main_block = j.at("main_block").get<BoundingBox>();
  if (j.contains("side_blocks")) c.side_blocks = j.at("side_blocks").get<std::vector<BoundingBox>>();
  c.main_glyph_height = j.value("main_glyph_height", c.main_glyph_height);
  c.side_glyph_height = j.value("side_glyph_height", c.side_glyph_height);
  c.line_spacing = j.value("line_spacing", c.line_spacing);
  c.min_glyph_aspect = j.value("min_glyph_aspect", c.min_glyph_aspect);
  c.max_glyph_aspect = j.value("max_glyph_aspect", c.max_glyph_aspect);
  c.min_glyph_gap = j.value("min_glyph_gap", c.min_glyph_gap);
  c.max_glyph_gap = j.value("max_glyph_gap", c.max_glyph_gap);
  c.word_gap_probability = j.value("word_gap_probability", c.word_gap_probability);
  c.word_gap = j.value("word_gap", c.word_gap);
  c.min_ink = j.value("min_ink", c.min_ink);
  c.max_ink = j.value("max_ink", c.max_ink);
  c.paper = j.value("paper", c.paper);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
}

}  // namespace pageseg
