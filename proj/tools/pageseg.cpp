#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "pageseg/errors.hpp"
#include "pageseg/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

struct Overrides {
  std::string config;
  std::string dataset_root;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::int64_t> train_pairs;
  std::optional<std::int64_t> val_pairs;
  std::optional<int> patch_size;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<int> batch_size;
  std::optional<std::string> architecture;
  std::optional<int> stride;
  std::optional<int> pages;
  std::vector<std::string> images;
};

pageseg::PipelineConfig resolve(const Overrides& o) {
  pageseg::PipelineConfig cfg;
  if (!o.config.empty()) cfg = pageseg::load_pipeline_config(o.config);
  if (!o.dataset_root.empty()) cfg.dataset_root = o.dataset_root;
  pageseg::apply_env_overrides(cfg);
  if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
  if (o.seed) {
    cfg.sampler.rng_seed = *o.seed;
    cfg.training.rng_seed = *o.seed;
    cfg.synth.rng_seed = *o.seed;
    cfg.segmentation.pca_seed = *o.seed;
  }
  if (o.workers) cfg.workers = *o.workers;
  if (o.train_pairs) cfg.train_pairs = *o.train_pairs;
  if (o.val_pairs) cfg.val_pairs = *o.val_pairs;
  if (o.patch_size) cfg.sampler.patch_size = *o.patch_size;
  if (o.epochs) cfg.training.max_epochs = *o.epochs;
  if (o.learning_rate) cfg.training.learning_rate = *o.learning_rate;
  if (o.batch_size) cfg.training.batch_size = *o.batch_size;
  if (o.architecture) cfg.architecture = *o.architecture;
  if (o.stride) cfg.sliding.stride = *o.stride;
  if (o.pages) cfg.synth_pages = *o.pages;
  return cfg;
}

std::vector<std::filesystem::path> as_paths(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised main-text / side-text page segmentation"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("-c,--config", o.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--dataset-root", o.dataset_root, "Dataset root (also $" + std::string(pageseg::kDatasetRootEnv) + ")");
  app.add_option("-o,--output", o.output_dir, "Run output directory");
  app.add_option("--seed", o.seed, "Seed for every random stage");
  app.add_option("--workers", o.workers, "Parallelism cap")->check(CLI::PositiveNumber);

  auto* prepare = app.add_subcommand("prepare-pairs", "Self-label patch pairs from the train/val pages");
  prepare->add_option("--total", o.train_pairs, "Training pairs (half similar, half different)");
  prepare->add_option("--val-total", o.val_pairs, "Validation pairs");
  prepare->add_option("--patch-size", o.patch_size, "Patch side in pixels; 0 estimates it from the pages");

  auto* train = app.add_subcommand("train", "Train the siamese network on the prepared pairs");
  train->add_option("--epochs", o.epochs, "Maximum epochs");
  train->add_option("--lr", o.learning_rate, "Adam learning rate");
  train->add_option("--batch-size", o.batch_size, "Pairs per batch");
  train->add_option("--architecture", o.architecture, "Architecture preset (alexnet_like, compact)");

  auto* segment = app.add_subcommand("segment", "Segment pages into main text and side text");
  segment->add_option("images", o.images, "Images (default: test split)");
  segment->add_option("--stride", o.stride, "Sliding-window stride");

  auto* evaluate = app.add_subcommand("evaluate", "Pixel F-measure of the test split segmentations");

  auto* visualize = app.add_subcommand("visualize", "Write PCA-RGB renderings of the feature maps");
  visualize->add_option("images", o.images, "Images (default: test split)");
  visualize->add_option("--stride", o.stride, "Sliding-window stride");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  synth->add_option("--pages", o.pages, "Number of pages");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    const auto cfg = resolve(o);
    if (*prepare) {
      pageseg::cmd_prepare_pairs(cfg, std::cout);
    } else if (*train) {
      pageseg::cmd_train(cfg, std::cout);
    } else if (*segment) {
      const auto r = pageseg::cmd_segment(cfg, as_paths(o.images), std::cout);
      if (!r.failures.empty()) return kExitData;
    } else if (*evaluate) {
      if (!pageseg::cmd_evaluate(cfg, std::cout).complete()) return kExitData;
    } else if (*visualize) {
      const auto r = pageseg::cmd_visualize(cfg, as_paths(o.images), std::cout);
      if (!r.failures.empty()) return kExitData;
    } else if (*synth) {
      pageseg::cmd_synth(cfg, std::cout);
    }
  } catch (const pageseg::DivergenceError& e) {
    std::cerr << "error: training diverged at epoch " << e.epoch() << ": " << e.what() << '\n';
    return kExitDivergence;
  } catch (const pageseg::SamplingError& e) {
    std::cerr << "error: pair sampling exhausted for strategy '" << e.strategy() << "': " << e.what() << '\n';
    return kExitData;
  } catch (const pageseg::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
