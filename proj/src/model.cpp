#include "pageseg/model.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>

#include "pageseg/json_io.hpp"

namespace pageseg {

using nlohmann::json;

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  if (early_stop_patience < 1) throw ConfigError("early_stop_patience must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0,1)");
}

PairPatchSet::PairPatchSet(const PairDatasetManifest& manifest, std::span<const DocumentImage> docs)
    : manifest_(&manifest) {
  for (const auto& d : docs) docs_[d.source_id] = &d;
  for (const auto& e : manifest.entries) {
    for (const auto* id : {&e.source_id_a, &e.source_id_b}) {
      if (!docs_.contains(*id)) throw ConfigError("manifest references unknown document '" + *id + "'");
    }
  }
}

void PairPatchSet::fill(std::size_t i, std::span<float> a, std::span<float> b) const {
  const ManifestEntry& e = manifest_->entries.at(i);
  auto copy = [](const DocumentImage& doc, const PatchGeometry& g, std::span<float> dst) {
    if (dst.size() != static_cast<std::size_t>(g.size) * g.size) throw ShapeError("patch buffer size mismatch");
    if (!geometry_inside(g, doc.width(), doc.height())) throw BoundsError("manifest patch outside '" + doc.source_id + "'");
    for (int y = 0; y < g.size; ++y) {
      const auto row = doc.pixels.row(g.y + y);
      std::copy_n(row.begin() + g.x, g.size, dst.begin() + static_cast<std::ptrdiff_t>(y) * g.size);
    }
  };
  copy(*docs_.at(e.source_id_a), e.geometry_a, a);
  copy(*docs_.at(e.source_id_b), e.geometry_b, b);
}

std::vector<std::string> PairPatchSet::source_ids() const {
  std::set<std::string> ids;
  for (const auto& e : manifest_->entries) {
    ids.insert(e.source_id_a);
    ids.insert(e.source_id_b);
  }
  return {ids.begin(), ids.end()};
}

int PairPatchSet::patch_size() const {
  if (manifest_->entries.empty()) return 0;
  return manifest_->entries.front().geometry_a.size;
}

namespace {

struct BatchBuffers {
  std::vector<float> pixels_a;
  std::vector<float> pixels_b;
  std::vector<const float*> ptr_a;
  std::vector<const float*> ptr_b;
  std::vector<int> labels;

  void load(const PairPatchSet& data, std::span<const std::size_t> batch, std::size_t volume) {
    pixels_a.resize(batch.size() * volume);
    pixels_b.resize(batch.size() * volume);
    ptr_a.resize(batch.size());
    ptr_b.resize(batch.size());
    labels.resize(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
      std::span<float> a(pixels_a.data() + k * volume, volume);
      std::span<float> b(pixels_b.data() + k * volume, volume);
      data.fill(batch[k], a, b);
      ptr_a[k] = a.data();
      ptr_b[k] = b.data();
      labels[k] = data.label(batch[k]);
    }
  }
};

void check_patch_size(const SiameseModel& model, const PairPatchSet& data) {
  if (data.size() > 0 && data.patch_size() != model.architecture().input_size) {
    throw ShapeError("pairs use " + std::to_string(data.patch_size()) + "px patches, model expects " +
                     std::to_string(model.architecture().input_size) + "px");
  }
}

}  // namespace

Trainer::Trainer(SiameseModel& model, const TrainingConfig& cfg)
    : model_(&model),
      cfg_(cfg),
      grad_(model.parameters().size(), 0.0f),
      m_(model.parameters().size(), 0.0),
      v_(model.parameters().size(), 0.0) {
  cfg_.validate();
}

double Trainer::step(const PairPatchSet& data, std::span<const std::size_t> batch) {
  BatchBuffers buf;
  buf.load(data, batch, model_->input_volume());
  const double loss = model_->batch_loss(buf.ptr_a, buf.ptr_b, buf.labels, grad_);
  if (!std::isfinite(loss)) return loss;
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  auto params = model_->parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad_[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= static_cast<float>(cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon));
  }
  return loss;
}

EvaluationResult evaluate_pairs(const SiameseModel& model, const PairPatchSet& data, int batch_size) {
  check_patch_size(model, data);
  EvaluationResult r;
  if (data.size() == 0) return r;
  BatchBuffers buf;
  std::vector<std::size_t> idx;
  double loss_sum = 0.0;
  long correct = 0;
  double sim_sum = 0.0, diff_sum = 0.0;
  long sim_n = 0, diff_n = 0;
  for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(data.size(), start + static_cast<std::size_t>(batch_size));
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    buf.load(data, idx, model.input_volume());
    std::vector<float> logits(idx.size());
    const double l = model.batch_loss(buf.ptr_a, buf.ptr_b, buf.labels, {}, logits);
    loss_sum += l * static_cast<double>(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double p = sigmoid(static_cast<double>(logits[k]));
      const int predicted = p >= 0.5 ? 1 : 0;
      correct += predicted == buf.labels[k] ? 1 : 0;
      if (buf.labels[k] == 0) {
        sim_sum += p;
        ++sim_n;
      } else {
        diff_sum += p;
        ++diff_n;
      }
    }
  }
  r.loss = loss_sum / static_cast<double>(data.size());
  r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  r.mean_score_similar = sim_n ? sim_sum / sim_n : 0.0;
  r.mean_score_different = diff_n ? diff_sum / diff_n : 0.0;
  return r;
}

TrainingResult train(const SiameseModel& model, const PairPatchSet& train_pairs, const PairPatchSet& val_pairs,
                     const TrainingConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_pairs.size() == 0) throw ConfigError("training manifest is empty");
  if (val_pairs.size() == 0) throw ConfigError("validation manifest is empty");
  check_patch_size(model, train_pairs);
  check_patch_size(model, val_pairs);
  {
    const auto tr = train_pairs.source_ids();
    const auto va = val_pairs.source_ids();
    std::vector<std::string> shared;
    std::set_intersection(tr.begin(), tr.end(), va.begin(), va.end(), std::back_inserter(shared));
    if (!shared.empty()) {
      throw ConfigError("training and validation pairs share document '" + shared.front() + "'");
    }
  }

  TrainingResult result{model, {}};
  if (cfg.max_epochs == 0) return result;

  SiameseModel& current = result.model;
  Trainer trainer(current, cfg);
  Rng rng(cfg.rng_seed);
  std::vector<float> best(current.parameters().begin(), current.parameters().end());
  double best_val = std::numeric_limits<double>::infinity();
  int stale = 0;
  std::vector<std::size_t> order(train_pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      const double loss = trainer.step(train_pairs, batch);
      if (!std::isfinite(loss)) {
        throw DivergenceError(epoch, "training loss became non-finite in epoch " + std::to_string(epoch));
      }
      sum += loss * static_cast<double>(batch.size());
    }
    const EvaluationResult val = evaluate_pairs(current, val_pairs);
    if (!std::isfinite(val.loss)) {
      throw DivergenceError(epoch, "validation loss became non-finite in epoch " + std::to_string(epoch));
    }
    EpochRecord rec{epoch, sum / static_cast<double>(order.size()), val.loss, val.accuracy};
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (val.loss < best_val) {
      best_val = val.loss;
      result.history.best_epoch = epoch;
      std::copy(current.parameters().begin(), current.parameters().end(), best.begin());
      stale = 0;
    } else if (++stale >= cfg.early_stop_patience) {
      break;
    }
  }
  std::copy(best.begin(), best.end(), current.parameters().begin());
  return result;
}

FeatureExtractor::FeatureExtractor(Architecture arch, std::vector<float> branch_params)
    : arch_(std::move(arch)), layout_(ParameterLayout::build(arch_)) {
  if (branch_params.size() != layout_.branch_size) {
    throw ShapeError("branch parameter count does not match architecture");
  }
  params_ = std::make_shared<const std::vector<float>>(std::move(branch_params));
}

std::vector<float> FeatureExtractor::operator()(std::span<const float> patch) const {
  return branch_embed<float>(arch_, layout_, *params_, patch);
}

FeatureExtractor extract_branch(const SiameseModel& model) {
  const auto p = model.parameters();
  return FeatureExtractor(model.architecture(),
                          std::vector<float>(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(model.layout().branch_size)));
}

namespace {

constexpr char kCheckpointMagic[8] = {'P', 'S', 'E', 'G', 'C', 'K', 'P', 'T'};

template <typename V>
void put(std::string& buf, V v) {
  char bytes[sizeof(V)];
  std::memcpy(bytes, &v, sizeof(V));
  buf.append(bytes, sizeof(V));
}

template <typename V>
V take(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(V) > buf.size()) throw CheckpointError("checkpoint truncated");
  V v;
  std::memcpy(&v, buf.data() + pos, sizeof(V));
  pos += sizeof(V);
  return v;
}

json history_to_json(const TrainingHistory& h) {
  json rows = json::array();
  for (const auto& e : h.epochs) {
    rows.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}, {"val_accuracy", e.val_accuracy}});
  }
  return {{"epochs", rows}, {"best_epoch", h.best_epoch}};
}

TrainingHistory history_from_json(const json& j) {
  TrainingHistory h;
  h.best_epoch = j.value("best_epoch", 0);
  for (const auto& r : j.at("epochs")) {
    h.epochs.push_back({r.at("epoch").get<int>(), r.at("train_loss").get<double>(), r.at("val_loss").get<double>(),
                        r.value("val_accuracy", 0.0)});
  }
  return h;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const SiameseModel& model, const TrainingHistory& history,
                     const std::string& config_json) {
  json header = {{"architecture", model.architecture()},
                 {"history", history_to_json(history)},
                 {"config", json::parse(config_json)},
                 {"parameter_count", model.parameters().size()},
                 {"dtype", "float32"}};
  const std::string hdr = header.dump();
  std::string buf(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(buf, kCheckpointVersion);
  put<std::uint64_t>(buf, hdr.size());
  buf += hdr;
  const auto params = model.parameters();
  buf.append(reinterpret_cast<const char*>(params.data()), params.size_bytes());
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size())));
  put<std::uint32_t>(buf, crc);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kCheckpointMagic) + 16 || std::memcmp(buf.data(), kCheckpointMagic, 8) != 0) {
    throw CheckpointError(path.string() + " is not a checkpoint");
  }
  std::size_t pos = sizeof(kCheckpointMagic);
  const auto version = take<std::uint32_t>(buf, pos);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint format version " + std::to_string(version) + " is incompatible with version " +
                          std::to_string(kCheckpointVersion));
  }
  std::size_t crc_pos = buf.size() - sizeof(std::uint32_t);
  const auto stored_crc = take<std::uint32_t>(buf, crc_pos);
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size() - sizeof(std::uint32_t))));
  if (crc != stored_crc) throw CheckpointError("checkpoint " + path.string() + " is corrupted (checksum mismatch)");
  const auto hdr_len = take<std::uint64_t>(buf, pos);
  if (pos + hdr_len > buf.size()) throw CheckpointError("checkpoint header truncated");
  json header;
  Architecture arch;
  std::size_t count = 0;
  try {
    header = json::parse(buf.substr(pos, hdr_len));
    arch = header.at("architecture").get<Architecture>();
    count = header.at("parameter_count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  pos += hdr_len;
  if (pos + count * sizeof(float) + sizeof(std::uint32_t) != buf.size()) {
    throw CheckpointError("checkpoint parameter block has unexpected size");
  }
  std::vector<float> params(count);
  std::memcpy(params.data(), buf.data() + pos, count * sizeof(float));
  return Checkpoint{SiameseModel(std::move(arch), std::move(params)), history_from_json(header.at("history")),
                    header.at("config").dump()};
}

void write_history_csv(const std::filesystem::path& path, const TrainingHistory& history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,train_loss,val_loss\n";
  out.precision(10);
  for (const auto& e : history.epochs) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
}

}  // namespace pageseg
