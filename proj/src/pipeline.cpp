#include "pageseg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>

#include "pageseg/errors.hpp"
#include "pageseg/image_io.hpp"
#include "pageseg/json_io.hpp"

namespace pageseg {

namespace fs = std::filesystem;
using nlohmann::json;

void SplitLists::check_disjoint() const {
  std::set<std::string> seen;
  for (const auto* list : {&train, &val, &test}) {
    for (const auto& id : *list) {
      if (!seen.insert(id).second) throw ConfigError("document '" + id + "' appears in more than one split");
    }
  }
}

void PipelineConfig::validate() const {
  SamplerConfig s = sampler;
  if (s.patch_size <= 0) s.patch_size = 1;
  s.validate();
  if (train_pairs < 2) throw ConfigError("train_pairs must be >= 2");
  if (val_pairs < 0) throw ConfigError("val_pairs must be >= 0");
  training.validate();
  segmentation.validate();
  synth.validate();
  if (synth_pages < 1) throw ConfigError("synth_pages must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (sliding.batch < 1) throw ConfigError("sliding.batch must be >= 1");
  splits.check_disjoint();
}

json to_json(const PipelineConfig& c) {
  return json{{"dataset_root", c.dataset_root.string()},
              {"output_dir", c.output_dir.string()},
              {"splits", {{"train", c.splits.train}, {"val", c.splits.val}, {"test", c.splits.test}}},
              {"sampler", c.sampler},
              {"train_pairs", c.train_pairs},
              {"val_pairs", c.val_pairs},
              {"architecture", c.architecture},
              {"training", c.training},
              {"sliding", c.sliding},
              {"segmentation", c.segmentation},
              {"synth", c.synth},
              {"synth_pages", c.synth_pages},
              {"workers", c.workers}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
  static const std::set<std::string> known = {"dataset_root", "output_dir", "splits",       "sampler",
                                              "train_pairs",  "val_pairs",  "architecture", "training",
                                              "sliding",      "segmentation", "synth",      "synth_pages",
                                              "workers"};
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  PipelineConfig c;
  try {
    if (j.contains("dataset_root")) c.dataset_root = j.at("dataset_root").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("splits")) {
      const auto& s = j.at("splits");
      c.splits.train = s.value("train", std::vector<std::string>{});
      c.splits.val = s.value("val", std::vector<std::string>{});
      c.splits.test = s.value("test", std::vector<std::string>{});
    }
    if (j.contains("sampler")) c.sampler = j.at("sampler").get<SamplerConfig>();
    c.train_pairs = j.value("train_pairs", c.train_pairs);
    c.val_pairs = j.value("val_pairs", c.val_pairs);
    if (j.contains("architecture")) c.architecture = j.at("architecture");
    if (j.contains("training")) c.training = j.at("training").get<TrainingConfig>();
    if (j.contains("sliding")) c.sliding = j.at("sliding").get<SlidingConfig>();
    if (j.contains("segmentation")) c.segmentation = j.at("segmentation").get<SegmentationConfig>();
    if (j.contains("synth")) c.synth = j.at("synth").get<SynthConfig>();
    c.synth_pages = j.value("synth_pages", c.synth_pages);
    c.workers = j.value("workers", c.workers);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid pipeline config: ") + e.what());
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return pipeline_config_from_json(j);
}

void apply_env_overrides(PipelineConfig& cfg) {
  if (const char* root = std::getenv(kDatasetRootEnv); root != nullptr && *root != '\0') cfg.dataset_root = root;
}

namespace {

const std::vector<std::string>& image_extensions() {
  static const std::vector<std::string> ext = {".png", ".tif", ".tiff", ".jpg", ".jpeg"};
  return ext;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<DocumentImage> load_documents(const fs::path& root, const std::vector<std::string>& ids) {
  std::vector<DocumentImage> docs;
  docs.reserve(ids.size());
  for (const auto& id : ids) docs.push_back(load_document(root, id));
  return docs;
}

std::vector<std::string> manifest_sources(const PairDatasetManifest& m) {
  std::set<std::string> ids;
  for (const auto& e : m.entries) {
    ids.insert(e.source_id_a);
    ids.insert(e.source_id_b);
  }
  return {ids.begin(), ids.end()};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<std::string> list_dataset_ids(const fs::path& root) {
  const fs::path dir = root / "images";
  if (!fs::is_directory(dir)) throw IoError("dataset has no images directory: " + dir.string());
  std::set<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = lower(entry.path().extension().string());
    if (std::find(image_extensions().begin(), image_extensions().end(), ext) != image_extensions().end()) {
      ids.insert(entry.path().stem().string());
    }
  }
  return {ids.begin(), ids.end()};
}

fs::path find_image(const fs::path& root, const std::string& id) {
  for (const auto& ext : image_extensions()) {
    const fs::path p = root / "images" / (id + ext);
    if (fs::exists(p)) return p;
  }
  throw IoError("no image for document '" + id + "' under " + (root / "images").string());
}

DocumentImage load_document(const fs::path& root, const std::string& id) {
  DocumentImage d = load_image(find_image(root, id));
  d.source_id = id;
  return d;
}

PageSegmentation load_labels(const fs::path& root, const std::string& id) {
  const fs::path p = root / "labels" / (id + ".png");
  if (!fs::exists(p)) throw IoError("no label map for document '" + id + "'");
  PageSegmentation seg = read_indexed_png(p);
  for (auto v : seg.data()) {
    if (v > 2) throw FormatError(p.string() + " contains label values outside {0,1,2}");
  }
  return seg;
}

SplitLists automatic_splits(const std::vector<std::string>& ids) {
  const auto n = static_cast<long>(ids.size());
  if (n < 3) throw ConfigError("at least 3 documents are needed to split automatically");
  const long n_test = std::max(1L, std::lround(n * 10.0 / 38.0));
  const long n_val = std::max(1L, std::lround(n * 6.0 / 38.0));
  if (n - n_test - n_val < 1) throw ConfigError("too few documents to split automatically");
  SplitLists s;
  const long n_train = n - n_test - n_val;
  s.train.assign(ids.begin(), ids.begin() + n_train);
  s.val.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  s.test.assign(ids.begin() + n_train + n_val, ids.end());
  return s;
}

SplitLists synth_splits(int n_pages) {
  if (n_pages < 1) throw ConfigError("n_pages must be >= 1");
  std::vector<std::string> ids;
  for (int i = 0; i < n_pages; ++i) ids.push_back(synth_page_id(i));
  const int n_val = n_pages >= 3 ? static_cast<int>(std::lround(n_pages * 0.15)) : 0;
  const int n_test = n_pages >= 3 ? static_cast<int>(std::lround(n_pages * 0.15)) : 0;
  SplitLists s;
  const int n_train = n_pages - n_val - n_test;
  s.train.assign(ids.begin(), ids.begin() + n_train);
  s.val.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  s.test.assign(ids.begin() + n_train + n_val, ids.end());
  return s;
}

void write_splits(const fs::path& path, const SplitLists& s) {
  write_json(path, json{{"train", s.train}, {"val", s.val}, {"test", s.test}});
}

SplitLists read_splits(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    json j;
    in >> j;
    SplitLists s;
    s.train = j.value("train", std::vector<std::string>{});
    s.val = j.value("val", std::vector<std::string>{});
    s.test = j.value("test", std::vector<std::string>{});
    s.check_disjoint();
    return s;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

SplitLists resolve_splits(const PipelineConfig& cfg) {
  if (!cfg.splits.empty()) return cfg.splits;
  const fs::path p = cfg.dataset_root / "splits.json";
  if (fs::exists(p)) return read_splits(p);
  return automatic_splits(list_dataset_ids(cfg.dataset_root));
}

RunPaths run_paths(const PipelineConfig& cfg) {
  RunPaths p;
  p.pairs_dir = cfg.output_dir / "pairs";
  p.train_manifest = p.pairs_dir / "train.jsonl";
  p.val_manifest = p.pairs_dir / "val.jsonl";
  p.model_dir = cfg.output_dir / "model";
  p.checkpoint = p.model_dir / "checkpoint.bin";
  p.history = p.model_dir / "history.csv";
  p.segment_dir = cfg.output_dir / "segment";
  p.eval_dir = cfg.output_dir / "eval";
  p.visualize_dir = cfg.output_dir / "visualize";
  return p;
}

SlidingConfig resolve_sliding(const SlidingConfig& cfg, int model_input) {
  SlidingConfig s = cfg;
  if (s.window <= 0) s.window = model_input;
  if (s.window != model_input) {
    throw ConfigError("sliding window " + std::to_string(s.window) + " differs from the model input size " +
                      std::to_string(model_input));
  }
  if (s.stride <= 0) s.stride = std::max(1, s.window / 4);
  s.validate();
  return s;
}

Architecture resolve_architecture(const json& spec, int input_size) {
  Architecture a;
  a.input_size = input_size;
  try {
    from_json(spec, a);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid architecture: ") + e.what());
  }
  if (a.input_size != input_size) {
    throw ConfigError("architecture input_size " + std::to_string(a.input_size) + " differs from the patch size " +
                      std::to_string(input_size));
  }
  a.validate();
  return a;
}

void write_resolved_config(const fs::path& dir, const PipelineConfig& cfg) {
  fs::create_directories(dir);
  write_json(dir / "config.resolved.json", to_json(cfg));
}

PreparePairsResult cmd_prepare_pairs(const PipelineConfig& cfg_in, std::ostream& log) {
  PipelineConfig cfg = cfg_in;
  cfg.validate();
  cfg.splits = resolve_splits(cfg);
  if (cfg.splits.train.empty()) throw ConfigError("the train split is empty");
  const auto paths = run_paths(cfg);
  const auto train_docs = load_documents(cfg.dataset_root, cfg.splits.train);
  if (cfg.sampler.patch_size <= 0) {
    cfg.sampler.patch_size = estimate_patch_size(train_docs, cfg.sampler.min_area, cfg.sampler.binarize);
    log << "estimated patch size " << cfg.sampler.patch_size << " px\n";
  }
  fs::create_directories(paths.pairs_dir);

  PreparePairsResult r;
  r.patch_size = cfg.sampler.patch_size;
  Rng train_rng(cfg.sampler.rng_seed);
  r.train = build_pair_dataset(train_docs, cfg.train_pairs, cfg.sampler, train_rng);
  write_manifest(paths.train_manifest, r.train);
  log << "train pairs " << r.train.entries.size() << " from " << train_docs.size() << " documents:";
  for (const auto& [name, n] : r.train.counts) log << ' ' << name << '=' << n;
  log << '\n';

  if (cfg.val_pairs > 0) {
    if (cfg.splits.val.empty()) throw ConfigError("val_pairs > 0 but the validation split is empty");
    const auto val_docs = load_documents(cfg.dataset_root, cfg.splits.val);
    Rng val_rng(cfg.sampler.rng_seed + 1);
    r.val = build_pair_dataset(val_docs, cfg.val_pairs, cfg.sampler, val_rng);
    write_manifest(paths.val_manifest, r.val);
    log << "val pairs " << r.val.entries.size() << " from " << val_docs.size() << " documents:";
    for (const auto& [name, n] : r.val.counts) log << ' ' << name << '=' << n;
    log << '\n';
  }
  write_resolved_config(paths.pairs_dir, cfg);
  return r;
}

TrainCommandResult cmd_train(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto paths = run_paths(cfg);
  const auto train_manifest = read_manifest(paths.train_manifest);
  if (!fs::exists(paths.val_manifest)) throw IoError("no validation manifest at " + paths.val_manifest.string());
  const auto val_manifest = read_manifest(paths.val_manifest);
  if (train_manifest.entries.empty()) throw ConfigError("training manifest is empty");
  const int patch = train_manifest.config.patch_size;

  const auto train_docs = load_documents(cfg.dataset_root, manifest_sources(train_manifest));
  const auto val_docs = load_documents(cfg.dataset_root, manifest_sources(val_manifest));
  const PairPatchSet train_set(train_manifest, train_docs);
  const PairPatchSet val_set(val_manifest, val_docs);

  PipelineConfig resolved = cfg;
  resolved.sampler = train_manifest.config;
  const Architecture arch = resolve_architecture(cfg.architecture, patch);
  json arch_json;
  to_json(arch_json, arch);
  resolved.architecture = arch_json;

  const SiameseModel init(arch, cfg.training.rng_seed);
  log << "architecture " << arch.name << ", input " << arch.input_size << ", " << init.parameters().size()
      << " parameters, " << train_set.size() << " train / " << val_set.size() << " val pairs\n";
  const auto t0 = std::chrono::steady_clock::now();
  auto result = train(init, train_set, val_set, cfg.training, [&](const EpochRecord& e) {
    log << "epoch " << e.epoch << " train_loss " << std::fixed << std::setprecision(4) << e.train_loss
        << " val_loss " << e.val_loss << " val_acc " << e.val_accuracy << " (" << std::setprecision(1)
        << seconds_since(t0) << " s)\n"
        << std::defaultfloat << std::setprecision(6);
  });
  fs::create_directories(paths.model_dir);
  save_checkpoint(paths.checkpoint, result.model, result.history, to_json(resolved).dump());
  write_history_csv(paths.history, result.history);
  write_resolved_config(paths.model_dir, resolved);
  log << "best epoch " << result.history.best_epoch << ", checkpoint " << paths.checkpoint.string() << '\n';
  return {result.history, paths.checkpoint};
}

namespace {

std::vector<fs::path> default_images(const PipelineConfig& cfg) {
  std::vector<fs::path> images;
  for (const auto& id : resolve_splits(cfg).test) images.push_back(find_image(cfg.dataset_root, id));
  return images;
}

template <typename Fn>
SegmentCommandResult for_each_page(const PipelineConfig& cfg, const std::vector<fs::path>& images_in,
                                   const fs::path& out_dir, std::ostream& log, Fn&& fn) {
  cfg.validate();
  const auto paths = run_paths(cfg);
  const Checkpoint ckpt = load_checkpoint(paths.checkpoint);
  const FeatureExtractor extractor = extract_branch(ckpt.model);
  PipelineConfig resolved = cfg;
  resolved.sliding = resolve_sliding(cfg.sliding, extractor.input_size());
  const auto images = images_in.empty() ? default_images(cfg) : images_in;
  fs::create_directories(out_dir);

  SegmentCommandResult r;
  for (const auto& path : images) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      DocumentImage img = load_image(path);
      img.source_id = path.stem().string();
      fn(extractor, resolved, img);
      r.written.push_back(img.source_id);
      log << img.source_id << " done (" << std::fixed << std::setprecision(1) << seconds_since(t0) << " s)\n"
          << std::defaultfloat << std::setprecision(6);
    } catch (const Error& e) {
      r.failures.push_back({path.string(), e.what()});
      log << "error: " << path.string() << ": " << e.what() << '\n';
    }
  }
  write_resolved_config(out_dir, resolved);
  return r;
}

}  // namespace

SegmentCommandResult cmd_segment(const PipelineConfig& cfg, const std::vector<fs::path>& images, std::ostream& log) {
  const fs::path dir = run_paths(cfg).segment_dir;
  json summary = json::object();
  auto r = for_each_page(cfg, images, dir, log,
                         [&](const FeatureExtractor& ex, const PipelineConfig& rc, const DocumentImage& img) {
                           const auto page = segment_page(ex, img, rc.sliding, rc.segmentation, rc.sampler.binarize);
                           write_rgb_png(dir / (img.source_id + "_pca.png"), visualize_pca_rgb(page.components));
                           write_gray_png(dir / (img.source_id + "_mask.png"), mask_to_gray(page.threshold.mask));
                           write_indexed_png(dir / (img.source_id + "_seg.png"), page.segmentation, label_palette());
                           summary[img.source_id] = {{"t1", page.threshold.t1},
                                                     {"t2", page.threshold.t2},
                                                     {"explained_variance", page.pca.explained_variance},
                                                     {"orientation", page.pca.orientation},
                                                     {"degenerate", page.pca.degenerate},
                                                     {"orientation_unresolved", page.pca.orientation_unresolved}};
                         });
  write_json(dir / "summary.json", summary);
  return r;
}

SegmentCommandResult cmd_visualize(const PipelineConfig& cfg, const std::vector<fs::path>& images,
                                   std::ostream& log) {
  const fs::path dir = run_paths(cfg).visualize_dir;
  return for_each_page(cfg, images, dir, log,
                       [&](const FeatureExtractor& ex, const PipelineConfig& rc, const DocumentImage& img) {
                         const FeatureMap map = extract_feature_map(ex, img, rc.sliding);
                         const BinaryImage bin = binarize(img, rc.sampler.binarize);
                         const PcaFitOptions fit{rc.segmentation.k, rc.segmentation.pca_max_samples,
                                                 rc.segmentation.pca_seed};
                         const PCAModel pca =
                             orient_components(fit_pca(map, fit), map, bin, rc.segmentation);
                         write_rgb_png(dir / (img.source_id + "_pca.png"), visualize_pca_rgb(pca, map));
                       });
}

EvaluateCommandResult cmd_evaluate(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto paths = run_paths(cfg);
  const auto splits = resolve_splits(cfg);
  if (splits.test.empty()) throw ConfigError("the test split is empty");
  EvaluateCommandResult r;
  std::map<std::string, PageSegmentation> preds;
  std::map<std::string, PageSegmentation> gts;
  for (const auto& id : splits.test) {
    if (!fs::exists(cfg.dataset_root / "labels" / (id + ".png"))) {
      r.missing_ground_truth.push_back(id);
      log << "warning: no ground truth for " << id << ", excluded\n";
      continue;
    }
    gts.emplace(id, load_labels(cfg.dataset_root, id));
    const fs::path pred = paths.segment_dir / (id + "_seg.png");
    if (fs::exists(pred)) preds.emplace(id, read_indexed_png(pred));
  }
  r.report = evaluate_corpus(preds, gts);
  r.missing_predictions = r.report.missing;
  for (const auto& id : r.missing_predictions) log << "warning: no prediction for " << id << ", excluded\n";
  fs::create_directories(paths.eval_dir);
  write_report_csv(paths.eval_dir / "report.csv", r.report);
  const std::string table = format_report_table(r.report);
  {
    std::ofstream out(paths.eval_dir / "report.txt");
    if (!out) throw IoError("cannot write report.txt");
    out << table;
  }
  write_resolved_config(paths.eval_dir, cfg);
  log << table;
  return r;
}

SplitLists cmd_synth(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  Rng rng(cfg.synth.rng_seed);
  const auto pages = generate_corpus(cfg.synth, cfg.synth_pages, rng);
  write_dataset(cfg.dataset_root, pages);
  const SplitLists splits = synth_splits(cfg.synth_pages);
  write_splits(cfg.dataset_root / "splits.json", splits);
  write_resolved_config(cfg.dataset_root, cfg);
  log << "wrote " << pages.size() << " pages to " << cfg.dataset_root.string() << " (" << splits.train.size()
      << " train / " << splits.val.size() << " val / " << splits.test.size() << " test)\n";
  return splits;
}

}  // namespace pageseg
