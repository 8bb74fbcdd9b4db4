#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pageseg/imaging.hpp"

namespace pageseg {

using Rng = std::mt19937_64;

enum class PairStrategy { kProximity, kComponentSize, kForegroundCount, kBackground };

inline constexpr std::array<PairStrategy, 4> kAllStrategies = {
    PairStrategy::kProximity, PairStrategy::kComponentSize, PairStrategy::kForegroundCount,
    PairStrategy::kBackground};

std::string to_string(PairStrategy s);
PairStrategy strategy_from_string(const std::string& name);

/// 0 = similar, 1 = different.
inline int label_for(PairStrategy s) noexcept { return s == PairStrategy::kProximity ? 0 : 1; }

struct SamplerConfig {
  int patch_size = 200;
  double s_threshold = 0.5;
  double bg_foreground_ratio = 0.01;
  double perturb_fraction = 0.25;
  int max_rejections = 10000;
  std::uint64_t rng_seed = 0;
  int min_area = kDefaultMinArea;
  BinarizeOptions binarize;

  void validate() const;
};

struct PatchPair {
  Patch patch_a;
  Patch patch_b;
  int label = 0;
  PairStrategy strategy = PairStrategy::kProximity;
};

/// Ratio min(h1*w1, h2*w2) / max(h1*w1, h2*w2) of mean component areas.
double similarity_s1(const ComponentStats& a, const ComponentStats& b);
/// Ratio min(a1, a2) / max(a1, a2) of foreground pixel counts.
double similarity_s2(long a1, long a2);

bool is_background_patch(long foreground, int size, const SamplerConfig& cfg) noexcept;
bool is_background_patch(const Patch& patch, const BinaryImage& bin, const SamplerConfig& cfg);

/// One of the 8 neighbour directions, dx and dy in {-1, 0, 1}, not both zero.
struct NeighborOffset {
  int dx = 0;
  int dy = 0;
};
inline constexpr std::array<NeighborOffset, 8> kNeighborOffsets = {
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

PatchGeometry neighbor_geometry(const PatchGeometry& first, NeighborOffset dir, int perturb_x, int perturb_y);

/// Geometry and statistics of a sampled pair, without pixel data.
struct PairRecord {
  std::size_t doc_a = 0;
  std::size_t doc_b = 0;
  PatchGeometry geometry_a;
  PatchGeometry geometry_b;
  ComponentStats stats_a;
  ComponentStats stats_b;
  PairStrategy strategy = PairStrategy::kProximity;
  int neighbor = -1;  // index into kNeighborOffsets for proximity pairs
};

/// Holds binarized copies of a document set and draws pairs from it.
class PairSampler {
 public:
  PairSampler(std::span<const DocumentImage> docs, SamplerConfig cfg);

  PairRecord sample(PairStrategy strategy, Rng& rng) const;
  PairRecord sample_neighbor(std::size_t doc, Rng& rng) const;
  PairRecord sample_component_size(Rng& rng) const;
  PairRecord sample_foreground(Rng& rng) const;
  PairRecord sample_background(Rng& rng) const;

  PatchPair materialize(const PairRecord& rec) const;

  const SamplerConfig& config() const noexcept { return cfg_; }
  std::span<const DocumentImage> documents() const noexcept { return docs_; }
  const BinaryImage& mask(std::size_t doc) const { return masks_.at(doc); }
  long foreground(std::size_t doc, const PatchGeometry& g) const;

 private:
  std::size_t pick_document(Rng& rng, PairStrategy strategy) const;
  PatchGeometry random_geometry(std::size_t doc, Rng& rng) const;
  ComponentStats stats(std::size_t doc, const PatchGeometry& g) const;

  std::span<const DocumentImage> docs_;
  SamplerConfig cfg_;
  std::vector<BinaryImage> masks_;
  std::vector<std::vector<long>> integrals_;
  std::vector<std::size_t> usable_;  // documents at least one patch wide and tall
};

PatchPair sample_neighbor_pair(const DocumentImage& doc, const SamplerConfig& cfg, Rng& rng);
PatchPair sample_component_size_pair(std::span<const DocumentImage> docs, const SamplerConfig& cfg, Rng& rng);
PatchPair sample_foreground_pair(std::span<const DocumentImage> docs, const SamplerConfig& cfg, Rng& rng);
PatchPair sample_background_pair(std::span<const DocumentImage> docs, const SamplerConfig& cfg, Rng& rng);

struct ManifestEntry {
  std::int64_t pair_id = 0;
  int label = 0;
  PairStrategy strategy = PairStrategy::kProximity;
  std::string source_id_a;
  std::string source_id_b;
  PatchGeometry geometry_a;
  PatchGeometry geometry_b;
  ComponentStats stats_a;
  ComponentStats stats_b;
};

struct PairDatasetManifest {
  std::vector<ManifestEntry> entries;
  std::map<std::string, std::int64_t> counts;
  SamplerConfig config;

  std::int64_t count(PairStrategy s) const;
};

/// total/2 proximity pairs plus total/2 different pairs split across the
/// three different-strategies, shuffled. Deterministic for a given rng state.
PairDatasetManifest build_pair_dataset(std::span<const DocumentImage> docs, std::int64_t total,
                                       const SamplerConfig& cfg, Rng& rng);

/// Writes one JSON record per line at path and counts plus config to
/// path + ".meta.json".
void write_manifest(const std::filesystem::path& path, const PairDatasetManifest& manifest);
PairDatasetManifest read_manifest(const std::filesystem::path& path);

std::filesystem::path manifest_meta_path(const std::filesystem::path& path);

/// Re-derives each entry's strategy predicate from the masks. Returns the ids
/// of entries that violate it.
std::vector<std::int64_t> audit_manifest(const PairDatasetManifest& manifest,
                                         std::span<const DocumentImage> docs, const SamplerConfig& cfg);

}  // namespace pageseg
