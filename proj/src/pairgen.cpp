#include "pageseg/pairgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "pageseg/json_io.hpp"

namespace pageseg {

using nlohmann::json;

std::string to_string(PairStrategy s) {
  switch (s) {
    case PairStrategy::kProximity:
      return "proximity";
    case PairStrategy::kComponentSize:
      return "component_size";
    case PairStrategy::kForegroundCount:
      return "foreground_count";
    case PairStrategy::kBackground:
      return "background";
  }
  return "unknown";
}

PairStrategy strategy_from_string(const std::string& name) {
  for (PairStrategy s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  throw FormatError("unknown pair strategy '" + name + "'");
}

void SamplerConfig::validate() const {
  if (patch_size <= 0) throw ConfigError("patch_size must be positive");
  if (!(s_threshold > 0.0 && s_threshold < 1.0)) throw ConfigError("s_threshold must lie in (0,1)");
  if (!(bg_foreground_ratio >= 0.0 && bg_foreground_ratio < 0.5)) {
    throw ConfigError("bg_foreground_ratio must lie in [0,0.5)");
  }
  if (!(perturb_fraction >= 0.0 && perturb_fraction < 1.0)) throw ConfigError("perturb_fraction must lie in [0,1)");
  if (max_rejections < 1) throw ConfigError("max_rejections must be >= 1");
  if (min_area < 1) throw ConfigError("min_area must be >= 1");
}

double similarity_s1(const ComponentStats& a, const ComponentStats& b) {
  const double pa = a.avg_height * a.avg_width;
  const double pb = b.avg_height * b.avg_width;
  if (a.component_count <= 0 || b.component_count <= 0 || !(pa > 0.0) || !(pb > 0.0)) {
    throw UndefinedStatisticError("s1 undefined: a patch has no components");
  }
  return std::min(pa, pb) / std::max(pa, pb);
}

double similarity_s2(long a1, long a2) {
  if (a1 <= 0 || a2 <= 0) throw UndefinedStatisticError("s2 undefined: a patch has no foreground");
  return static_cast<double>(std::min(a1, a2)) / static_cast<double>(std::max(a1, a2));
}

bool is_background_patch(long foreground, int size, const SamplerConfig& cfg) noexcept {
  const double area = static_cast<double>(size) * static_cast<double>(size);
  return static_cast<double>(foreground) / area < cfg.bg_foreground_ratio;
}

bool is_background_patch(const Patch& patch, const BinaryImage& bin, const SamplerConfig& cfg) {
  return is_background_patch(foreground_count(bin, patch.geometry), patch.geometry.size, cfg);
}

PatchGeometry neighbor_geometry(const PatchGeometry& first, NeighborOffset dir, int perturb_x, int perturb_y) {
  return {first.x + dir.dx * first.size + perturb_x, first.y + dir.dy * first.size + perturb_y, first.size};
}

PairSampler::PairSampler(std::span<const DocumentImage> docs, SamplerConfig cfg) : docs_(docs), cfg_(cfg) {
  cfg_.validate();
  masks_.reserve(docs.size());
  integrals_.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& doc = docs[i];
    masks_.push_back(binarize(doc, cfg_.binarize));
    const BinaryImage& m = masks_.back();
    const int w = m.width();
    const int h = m.height();
    std::vector<long> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
      long run = 0;
      for (int x = 0; x < w; ++x) {
        run += m(x, y) ? 1 : 0;
        sat[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] = sat[static_cast<std::size_t>(y) * (w + 1) + x + 1] + run;
      }
    }
    integrals_.push_back(std::move(sat));
    if (doc.width() >= cfg_.patch_size && doc.height() >= cfg_.patch_size) usable_.push_back(i);
  }
}

long PairSampler::foreground(std::size_t doc, const PatchGeometry& g) const {
  const BinaryImage& m = masks_.at(doc);
  if (!geometry_inside(g, m.width(), m.height())) throw BoundsError("patch outside document");
  const auto& sat = integrals_[doc];
  const std::size_t stride = static_cast<std::size_t>(m.width()) + 1;
  auto at = [&](int x, int y) { return sat[static_cast<std::size_t>(y) * stride + x]; };
  return at(g.x + g.size, g.y + g.size) - at(g.x, g.y + g.size) - at(g.x + g.size, g.y) + at(g.x, g.y);
}

ComponentStats PairSampler::stats(std::size_t doc, const PatchGeometry& g) const {
  return component_stats(masks_.at(doc), g, cfg_.min_area);
}

std::size_t PairSampler::pick_document(Rng& rng, PairStrategy strategy) const {
  if (usable_.empty()) {
    throw SamplingError(to_string(strategy), "no document is at least " + std::to_string(cfg_.patch_size) +
                                                 " pixels on each side");
  }
  std::uniform_int_distribution<std::size_t> pick(0, usable_.size() - 1);
  return usable_[pick(rng)];
}

PatchGeometry PairSampler::random_geometry(std::size_t doc, Rng& rng) const {
  const int s = cfg_.patch_size;
  std::uniform_int_distribution<int> ux(0, docs_[doc].width() - s);
  std::uniform_int_distribution<int> uy(0, docs_[doc].height() - s);
  const int x = ux(rng);
  const int y = uy(rng);
  return {x, y, s};
}

PairRecord PairSampler::sample_neighbor(std::size_t doc, Rng& rng) const {
  const int s = cfg_.patch_size;
  const int margin = static_cast<int>(std::floor(s * cfg_.perturb_fraction));
  const DocumentImage& img = docs_[doc];
  if (img.width() < 2 * s + margin || img.height() < 2 * s + margin) {
    throw SamplingError(to_string(PairStrategy::kProximity),
                        "document '" + img.source_id + "' is too small for neighbouring patches of size " +
                            std::to_string(s));
  }
  std::uniform_int_distribution<int> pick_dir(0, static_cast<int>(kNeighborOffsets.size()) - 1);
  std::uniform_int_distribution<int> perturb(-margin, margin);
  const int dir = pick_dir(rng);
  const int px = perturb(rng);
  const int py = perturb(rng);
  const NeighborOffset off = kNeighborOffsets[static_cast<std::size_t>(dir)];
  const int ox = off.dx * s + px;
  const int oy = off.dy * s + py;
  // First patch uniform over positions that keep both patches in bounds.
  std::uniform_int_distribution<int> ux(std::max(0, -ox), std::min(img.width() - s, img.width() - s - ox));
  std::uniform_int_distribution<int> uy(std::max(0, -oy), std::min(img.height() - s, img.height() - s - oy));
  const int x1 = ux(rng);
  const int y1 = uy(rng);
  PairRecord rec;
  rec.doc_a = rec.doc_b = doc;
  rec.geometry_a = {x1, y1, s};
  rec.geometry_b = neighbor_geometry(rec.geometry_a, off, px, py);
  rec.stats_a = stats(doc, rec.geometry_a);
  rec.stats_b = stats(doc, rec.geometry_b);
  rec.strategy = PairStrategy::kProximity;
  rec.neighbor = dir;
  return rec;
}

PairRecord PairSampler::sample_component_size(Rng& rng) const {
  const int s = cfg_.patch_size;
  for (int attempt = 0; attempt < cfg_.max_rejections; ++attempt) {
    const std::size_t doc = pick_document(rng, PairStrategy::kComponentSize);
    const PatchGeometry a = random_geometry(doc, rng);
    const PatchGeometry b = random_geometry(doc, rng);
    if (is_background_patch(foreground(doc, a), s, cfg_) || is_background_patch(foreground(doc, b), s, cfg_)) {
      continue;
    }
    const ComponentStats sa = stats(doc, a);
    const ComponentStats sb = stats(doc, b);
    if (sa.component_count == 0 || sb.component_count == 0) continue;
    if (similarity_s1(sa, sb) < cfg_.s_threshold) {
      return PairRecord{doc, doc, a, b, sa, sb, PairStrategy::kComponentSize, -1};
    }
  }
  throw SamplingError(to_string(PairStrategy::kComponentSize),
                      "component_size: no pair with s1 < " + std::to_string(cfg_.s_threshold) + " after " +
                          std::to_string(cfg_.max_rejections) + " attempts");
}

PairRecord PairSampler::sample_foreground(Rng& rng) const {
  const int s = cfg_.patch_size;
  for (int attempt = 0; attempt < cfg_.max_rejections; ++attempt) {
    const std::size_t doc = pick_document(rng, PairStrategy::kForegroundCount);
    const PatchGeometry a = random_geometry(doc, rng);
    const PatchGeometry b = random_geometry(doc, rng);
    const long fa = foreground(doc, a);
    const long fb = foreground(doc, b);
    if (is_background_patch(fa, s, cfg_) || is_background_patch(fb, s, cfg_)) continue;
    if (fa == 0 || fb == 0) continue;
    if (similarity_s2(fa, fb) < cfg_.s_threshold) {
      return PairRecord{doc, doc, a, b, stats(doc, a), stats(doc, b), PairStrategy::kForegroundCount, -1};
    }
  }
  throw SamplingError(to_string(PairStrategy::kForegroundCount),
                      "foreground_count: no pair with s2 < " + std::to_string(cfg_.s_threshold) + " after " +
                          std::to_string(cfg_.max_rejections) + " attempts");
}

PairRecord PairSampler::sample_background(Rng& rng) const {
  const int s = cfg_.patch_size;
  for (int attempt = 0; attempt < cfg_.max_rejections; ++attempt) {
    const std::size_t doc = pick_document(rng, PairStrategy::kBackground);
    const PatchGeometry a = random_geometry(doc, rng);
    const PatchGeometry b = random_geometry(doc, rng);
    const bool bg_a = is_background_patch(foreground(doc, a), s, cfg_);
    const bool bg_b = is_background_patch(foreground(doc, b), s, cfg_);
    if (bg_a != bg_b) {
      return PairRecord{doc, doc, a, b, stats(doc, a), stats(doc, b), PairStrategy::kBackground, -1};
    }
  }
  throw SamplingError(to_string(PairStrategy::kBackground),
                      "background: no background/text pair after " + std::to_string(cfg_.max_rejections) +
                          " attempts");
}

PairRecord PairSampler::sample(PairStrategy strategy, Rng& rng) const {
  switch (strategy) {
    case PairStrategy::kProximity:
      return sample_neighbor(pick_document(rng, strategy), rng);
    case PairStrategy::kComponentSize:
      return sample_component_size(rng);
    case PairStrategy::kForegroundCount:
      return sample_foreground(rng);
    case PairStrategy::kBackground:
      return sample_background(rng);
  }
  throw ConfigError("unknown strategy");
}

PatchPair PairSampler::materialize(const PairRecord& rec) const {
  PatchPair pair;
  pair.patch_a = crop_patch(docs_[rec.doc_a], rec.geometry_a);
  pair.patch_b = crop_patch(docs_[rec.doc_b], rec.geometry_b);
  pair.strategy = rec.strategy;
  pair.label = label_for(rec.strategy);
  return pair;
}

PatchPair sample_neighbor_pair(const DocumentImage& doc, const SamplerConfig& cfg, Rng& rng) {
  const PairSampler sampler(std::span<const DocumentImage>(&doc, 1), cfg);
  return sampler.materialize(sampler.sample_neighbor(0, rng));
}

PatchPair sample_component_size_pair(std::span<const DocumentImage> docs, const SamplerConfig& cfg, Rng& rng) {
  const PairSampler sampler(docs, cfg);
  return sampler.materialize(sampler.sample_component_size(rng));
}

PatchPair sample_foreground_pair(std::span<const DocumentImage> docs, const SamplerConfig& cfg, Rng& rng) {
  const PairSampler sampler(docs, cfg);
  return sampler.materialize(sampler.sample_foreground(rng));
}

PatchPair sample_background_pair(std::span<const DocumentImage> docs, const SamplerConfig& cfg, Rng& rng) {
  const PairSampler sampler(docs, cfg);
  return sampler.materialize(sampler.sample_background(rng));
}

std::int64_t PairDatasetManifest::count(PairStrategy s) const {
  const auto it = counts.find(to_string(s));
  return it == counts.end() ? 0 : it->second;
}

PairDatasetManifest build_pair_dataset(std::span<const DocumentImage> docs, std::int64_t total,
                                       const SamplerConfig& cfg, Rng& rng) {
  if (total <= 0 || total % 2 != 0) throw ConfigError("total pair count must be positive and even");
  if (docs.empty()) throw ConfigError("no documents to sample pairs from");
  const PairSampler sampler(docs, cfg);

  const std::int64_t half = total / 2;
  std::array<std::int64_t, 4> want{half, half / 3, half / 3, half / 3};
  for (std::int64_t r = 0; r < half % 3; ++r) want[1 + r] += 1;

  // Each strategy draws from its own engine so one strategy's rejection count
  // does not shift another's stream.
  std::array<std::uint64_t, 4> seeds{};
  for (auto& s : seeds) s = rng();

  std::vector<PairRecord> records;
  records.reserve(static_cast<std::size_t>(total));
  for (std::size_t k = 0; k < kAllStrategies.size(); ++k) {
    Rng local(seeds[k]);
    for (std::int64_t i = 0; i < want[k]; ++i) records.push_back(sampler.sample(kAllStrategies[k], local));
  }
  std::shuffle(records.begin(), records.end(), rng);

  PairDatasetManifest manifest;
  manifest.config = cfg;
  manifest.entries.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PairRecord& r = records[i];
    ManifestEntry e;
    e.pair_id = static_cast<std::int64_t>(i);
    e.label = label_for(r.strategy);
    e.strategy = r.strategy;
    e.source_id_a = docs[r.doc_a].source_id;
    e.source_id_b = docs[r.doc_b].source_id;
    e.geometry_a = r.geometry_a;
    e.geometry_b = r.geometry_b;
    e.stats_a = r.stats_a;
    e.stats_b = r.stats_b;
    manifest.entries.push_back(std::move(e));
  }
  for (std::size_t k = 0; k < kAllStrategies.size(); ++k) manifest.counts[to_string(kAllStrategies[k])] = want[k];
  return manifest;
}

std::filesystem::path manifest_meta_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta.json");
}

void write_manifest(const std::filesystem::path& path, const PairDatasetManifest& manifest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  for (const auto& e : manifest.entries) {
    json j = {{"pair_id", e.pair_id},         {"label", e.label},
              {"strategy", to_string(e.strategy)}, {"source_id_a", e.source_id_a},
              {"source_id_b", e.source_id_b}, {"geometry_a", e.geometry_a},
              {"geometry_b", e.geometry_b},   {"stats_a", e.stats_a},
              {"stats_b", e.stats_b}};
    out << j.dump() << '\n';
  }
  std::int64_t similar = 0;
  for (const auto& e : manifest.entries) similar += e.label == 0 ? 1 : 0;
  json meta = {{"total", manifest.entries.size()},
               {"similar", similar},
               {"different", static_cast<std::int64_t>(manifest.entries.size()) - similar},
               {"counts", manifest.counts},
               {"config", manifest.config}};
  std::ofstream mo(manifest_meta_path(path), std::ios::binary);
  if (!mo) throw IoError("cannot write manifest metadata for " + path.string());
  mo << meta.dump(2) << '\n';
}

PairDatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest " + path.string());
  PairDatasetManifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.pair_id = j.at("pair_id").get<std::int64_t>();
      e.label = j.at("label").get<int>();
      e.strategy = strategy_from_string(j.at("strategy").get<std::string>());
      e.source_id_a = j.at("source_id_a").get<std::string>();
      e.source_id_b = j.at("source_id_b").get<std::string>();
      e.geometry_a = j.at("geometry_a").get<PatchGeometry>();
      e.geometry_b = j.at("geometry_b").get<PatchGeometry>();
      e.stats_a = j.at("stats_a").get<ComponentStats>();
      e.stats_b = j.at("stats_b").get<ComponentStats>();
      if (e.label != label_for(e.strategy)) throw FormatError("label does not match strategy");
      m.counts[to_string(e.strategy)] += 1;
      m.entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  const auto meta_path = manifest_meta_path(path);
  if (std::filesystem::exists(meta_path)) {
    std::ifstream mi(meta_path);
    try {
      m.config = json::parse(mi).at("config").get<SamplerConfig>();
    } catch (const json::exception& ex) {
      throw FormatError(meta_path.string() + ": " + ex.what());
    }
  }
  return m;
}

std::vector<std::int64_t> audit_manifest(const PairDatasetManifest& manifest,
                                         std::span<const DocumentImage> docs, const SamplerConfig& cfg) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < docs.size(); ++i) by_id[docs[i].source_id] = i;
  const PairSampler sampler(docs, cfg);
  std::vector<std::int64_t> bad;
  const int margin = static_cast<int>(std::floor(cfg.patch_size * cfg.perturb_fraction));
  for (const auto& e : manifest.entries) {
    const auto ia = by_id.find(e.source_id_a);
    const auto ib = by_id.find(e.source_id_b);
    if (ia == by_id.end() || ib == by_id.end()) {
      bad.push_back(e.pair_id);
      continue;
    }
    const std::size_t da = ia->second;
    const std::size_t db = ib->second;
    const int s = cfg.patch_size;
    const long fa = sampler.foreground(da, e.geometry_a);
    const long fb = sampler.foreground(db, e.geometry_b);
    const bool bga = is_background_patch(fa, s, cfg);
    const bool bgb = is_background_patch(fb, s, cfg);
    bool ok = e.label == label_for(e.strategy);
    switch (e.strategy) {
      case PairStrategy::kProximity: {
        const int ox = std::abs(e.geometry_b.x - e.geometry_a.x);
        const int oy = std::abs(e.geometry_b.y - e.geometry_a.y);
        auto axis_ok = [&](int d) { return d <= margin || (d >= s - margin && d <= s + margin); };
        ok = ok && da == db && axis_ok(ox) && axis_ok(oy) && (ox > margin || oy > margin);
        break;
      }
      case PairStrategy::kComponentSize: {
        const ComponentStats sa = component_stats(sampler.mask(da), e.geometry_a, cfg.min_area);
        const ComponentStats sb = component_stats(sampler.mask(db), e.geometry_b, cfg.min_area);
        ok = ok && !bga && !bgb && sa.component_count > 0 && sb.component_count > 0 &&
             similarity_s1(sa, sb) < cfg.s_threshold;
        break;
      }
      case PairStrategy::kForegroundCount:
        ok = ok && !bga && !bgb && fa > 0 && fb > 0 && similarity_s2(fa, fb) < cfg.s_threshold;
        break;
      case PairStrategy::kBackground:
        ok = ok && bga != bgb;
        break;
    }
    if (!ok) bad.push_back(e.pair_id);
  }
  return bad;
}

}  // namespace pageseg
