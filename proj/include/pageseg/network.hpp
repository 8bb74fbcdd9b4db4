#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pageseg {

/// One convolution stage: conv -> ReLU -> optional max-pool.
struct ConvSpec {
  int filters = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  bool pool = false;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct TensorShape {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::size_t volume() const noexcept {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
};

/// Layer schedule of the twin branches and the pair head. The branch is the
/// conv stack followed by branch_fc (last entry = embedding width); the head
/// concatenates two embeddings, runs head_fc hidden layers and one sigmoid
/// output unit.
struct Architecture {
  std::string name = "custom";
  int input_size = 200;
  std::vector<ConvSpec> convs;
  std::vector<int> branch_fc;
  std::vector<int> head_fc;
  int pool_kernel = 3;
  int pool_stride = 2;

  /// Five convolutions, AlexNet-like widths, fc 1024 -> 512, head 256 -> 1.
  static Architecture alexnet_like(int input_size = 200);
  /// Same topology with narrow layers for CPU-scale experiments.
  static Architecture compact(int input_size);
  /// Two convolutions on an 8x8 input, 4-d embedding; for gradient checks.
  static Architecture miniature();

  int embedding_size() const;
  /// Shape after each conv stage (after pooling when present).
  std::vector<TensorShape> stage_shapes() const;
  /// Throws ConfigError when a stage collapses to zero size.
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct DenseOffsets {
  std::size_t weight = 0;
  std::size_t bias = 0;
  int in = 0;
  int out = 0;
};

struct ConvOffsets {
  std::size_t weight = 0;
  std::size_t bias = 0;
  TensorShape in;
  TensorShape conv_out;  // before pooling
  TensorShape out;       // after pooling (== conv_out without pool)
};

/// Positions of every layer's weights inside the flat parameter buffer.
/// Branch parameters form a prefix of branch_size() values.
struct ParameterLayout {
  std::vector<ConvOffsets> convs;
  std::vector<DenseOffsets> branch_fc;
  std::vector<DenseOffsets> head_fc;  // includes the final 1-unit layer
  std::size_t branch_size = 0;
  std::size_t total_size = 0;

  static ParameterLayout build(const Architecture& arch);
};

/// Forward/backward kernels over a flat parameter buffer. Instantiated for
/// float (models) and double (gradient checks).
template <typename T>
class SiameseNetwork {
 public:
  SiameseNetwork(Architecture arch, std::uint64_t init_seed);
  SiameseNetwork(Architecture arch, std::vector<T> params);

  const Architecture& architecture() const noexcept { return arch_; }
  const ParameterLayout& layout() const noexcept { return layout_; }
  std::span<T> parameters() noexcept { return params_; }
  std::span<const T> parameters() const noexcept { return params_; }
  std::size_t input_volume() const noexcept {
    return static_cast<std::size_t>(arch_.input_size) * static_cast<std::size_t>(arch_.input_size);
  }

  /// Embedding of one input_size x input_size patch (row-major). Independent
  /// of any batching.
  std::vector<T> embed(std::span<const T> image) const;

  /// Pre-sigmoid score for an ordered pair of embeddings.
  T head_logit(std::span<const T> emb_a, std::span<const T> emb_b) const;

  T pair_probability(std::span<const T> image_a, std::span<const T> image_b) const;

  /// Mean binary cross-entropy over a batch of pairs (label 1 = different).
  /// When grad is non-empty it receives d(loss)/d(params) (overwritten).
  /// logits, if non-empty, receives the per-pair pre-sigmoid scores.
  T batch_loss(std::span<const T* const> images_a, std::span<const T* const> images_b,
               std::span<const int> labels, std::span<T> grad, std::span<T> logits = {}) const;

 private:
  Architecture arch_;
  ParameterLayout layout_;
  std::vector<T> params_;
};

/// Branch-only evaluation over a parameter prefix; SiameseNetwork::embed and
/// standalone feature extractors share this path.
template <typename T>
std::vector<T> branch_embed(const Architecture& arch, const ParameterLayout& layout, std::span<const T> params,
                            std::span<const T> image);

/// Numerically stable log(1 + exp(z)) - y z.
template <typename T>
T binary_cross_entropy_logit(T logit, int label);

template <typename T>
T sigmoid(T z);

extern template class SiameseNetwork<float>;
extern template class SiameseNetwork<double>;

}  // namespace pageseg
