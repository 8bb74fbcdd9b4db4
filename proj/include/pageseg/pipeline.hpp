#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pageseg/eval.hpp"
#include "pageseg/featmap.hpp"
#include "pageseg/model.hpp"
#include "pageseg/pairgen.hpp"
#include "pageseg/segment.hpp"
#include "pageseg/synthdoc.hpp"

namespace pageseg {

inline constexpr const char* kDatasetRootEnv = "PAGESEG_DATASET_ROOT";

struct SplitLists {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  bool empty() const noexcept { return train.empty() && val.empty() && test.empty(); }
  /// Throws ConfigError when an id appears in more than one list.
  void check_disjoint() const;
};

struct PipelineConfig {
  std::filesystem::path dataset_root = "data";
  std::filesystem::path output_dir = "run";
  /// Empty: read <dataset_root>/splits.json, else split automatically.
  SplitLists splits;

  SamplerConfig sampler;  // patch_size <= 0 estimates it from the train pages
  std::int64_t train_pairs = 60000;
  std::int64_t val_pairs = 15000;

  /// Preset name ("alexnet_like", "compact") or a full architecture object;
  /// input_size follows the patch size.
  nlohmann::json architecture = "alexnet_like";
  TrainingConfig training;
  /// window <= 0 uses the model input size; stride <= 0 uses window / 4.
  SlidingConfig sliding{0, 0, 64, true};
  SegmentationConfig segmentation;

  SynthConfig synth;
  int synth_pages = 20;

  /// Parallelism cap. Accepted for interface stability; work runs on one thread.
  int workers = 1;

  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
/// Replaces dataset_root with $PAGESEG_DATASET_ROOT when set.
void apply_env_overrides(PipelineConfig& cfg);

/// Stems of the files under <root>/images, sorted.
std::vector<std::string> list_dataset_ids(const std::filesystem::path& root);
std::filesystem::path find_image(const std::filesystem::path& root, const std::string& id);
DocumentImage load_document(const std::filesystem::path& root, const std::string& id);
PageSegmentation load_labels(const std::filesystem::path& root, const std::string& id);

/// 6/38 of the pages for validation and 10/38 for testing, rest training,
/// in sorted id order.
SplitLists automatic_splits(const std::vector<std::string>& ids);
/// Explicit lists, then splits.json, then automatic_splits.
SplitLists resolve_splits(const PipelineConfig& cfg);
void write_splits(const std::filesystem::path& path, const SplitLists& splits);
SplitLists read_splits(const std::filesystem::path& path);

/// 70/15/15 rounding used for generated corpora (14/3/3 for 20 pages).
SplitLists synth_splits(int n_pages);

struct RunPaths {
  std::filesystem::path pairs_dir;
  std::filesystem::path train_manifest;
  std::filesystem::path val_manifest;
  std::filesystem::path model_dir;
  std::filesystem::path checkpoint;
  std::filesystem::path history;
  std::filesystem::path segment_dir;
  std::filesystem::path eval_dir;
  std::filesystem::path visualize_dir;
};

RunPaths run_paths(const PipelineConfig& cfg);

/// Window and stride after applying the automatic rules.
SlidingConfig resolve_sliding(const SlidingConfig& cfg, int model_input);
Architecture resolve_architecture(const nlohmann::json& spec, int input_size);

struct PreparePairsResult {
  PairDatasetManifest train;
  PairDatasetManifest val;
  int patch_size = 0;
};

struct TrainCommandResult {
  TrainingHistory history;
  std::filesystem::path checkpoint;
};

struct FileFailure {
  std::string path;
  std::string message;
};

struct SegmentCommandResult {
  std::vector<std::string> written;  // page ids
  std::vector<FileFailure> failures;
};

struct EvaluateCommandResult {
  FMeasureReport report;
  std::vector<std::string> missing_predictions;
  std::vector<std::string> missing_ground_truth;
  bool complete() const noexcept { return missing_predictions.empty() && missing_ground_truth.empty(); }
};

PreparePairsResult cmd_prepare_pairs(const PipelineConfig& cfg, std::ostream& log);
TrainCommandResult cmd_train(const PipelineConfig& cfg, std::ostream& log);
/// Segments the given images, or the test split when images is empty.
/// Per-file failures are collected and the batch continues.
SegmentCommandResult cmd_segment(const PipelineConfig& cfg, const std::vector<std::filesystem::path>& images,
                                 std::ostream& log);
EvaluateCommandResult cmd_evaluate(const PipelineConfig& cfg, std::ostream& log);
SegmentCommandResult cmd_visualize(const PipelineConfig& cfg, const std::vector<std::filesystem::path>& images,
                                   std::ostream& log);
SplitLists cmd_synth(const PipelineConfig& cfg, std::ostream& log);

/// Writes the resolved config as <dir>/config.resolved.json.
void write_resolved_config(const std::filesystem::path& dir, const PipelineConfig& cfg);

}  // namespace pageseg
