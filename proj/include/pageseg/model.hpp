#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pageseg/network.hpp"
#include "pageseg/pairgen.hpp"

namespace pageseg {

/// Twin weight-tied branches plus pair head, float precision.
using SiameseModel = SiameseNetwork<float>;

struct TrainingConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int max_epochs = 30;
  int early_stop_patience = 5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 0 when no epoch ran
  friend bool operator==(const TrainingHistory&, const TrainingHistory&) = default;
};

/// Resolves manifest entries to pixel crops of in-memory documents.
class PairPatchSet {
 public:
  PairPatchSet(const PairDatasetManifest& manifest, std::span<const DocumentImage> docs);

  std::size_t size() const noexcept { return manifest_->entries.size(); }
  int label(std::size_t i) const { return manifest_->entries.at(i).label; }
  /// Writes both crops of pair i, row-major, into a and b.
  void fill(std::size_t i, std::span<float> a, std::span<float> b) const;
  std::vector<std::string> source_ids() const;
  int patch_size() const;

 private:
  const PairDatasetManifest* manifest_;
  std::unordered_map<std::string, const DocumentImage*> docs_;
};

/// Adam over the model's flat parameter buffer.
class Trainer {
 public:
  Trainer(SiameseModel& model, const TrainingConfig& cfg);

  /// One update on a batch; returns the batch's mean loss before the update.
  double step(const PairPatchSet& data, std::span<const std::size_t> batch);

 private:
  SiameseModel* model_;
  TrainingConfig cfg_;
  std::vector<float> grad_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

struct EvaluationResult {
  double loss = 0.0;
  double accuracy = 0.0;
  double mean_score_similar = 0.0;
  double mean_score_different = 0.0;
};

EvaluationResult evaluate_pairs(const SiameseModel& model, const PairPatchSet& data, int batch_size = 64);

struct TrainingResult {
  SiameseModel model;
  TrainingHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs Adam epochs, keeps the parameters of the best validation epoch and
/// stops after early_stop_patience epochs without improvement.
TrainingResult train(const SiameseModel& model, const PairPatchSet& train_pairs, const PairPatchSet& val_pairs,
                     const TrainingConfig& cfg, const EpochCallback& on_epoch = {});

/// Standalone copy of one branch: patch -> embedding.
class FeatureExtractor {
 public:
  FeatureExtractor(Architecture arch, std::vector<float> branch_params);

  std::vector<float> operator()(std::span<const float> patch) const;
  int input_size() const noexcept { return arch_.input_size; }
  int embedding_size() const noexcept { return arch_.embedding_size(); }
  const Architecture& architecture() const noexcept { return arch_; }

 private:
  Architecture arch_;
  ParameterLayout layout_;
  std::shared_ptr<const std::vector<float>> params_;
};

FeatureExtractor extract_branch(const SiameseModel& model);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  SiameseModel model;
  TrainingHistory history;
  std::string config_json;  // resolved training config, free-form JSON
};

void save_checkpoint(const std::filesystem::path& path, const SiameseModel& model, const TrainingHistory& history,
                     const std::string& config_json = "{}");
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// epoch,train_loss,val_loss
void write_history_csv(const std::filesystem::path& path, const TrainingHistory& history);

}  // namespace pageseg
