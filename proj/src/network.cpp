#include "pageseg/network.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pageseg/errors.hpp"

namespace pageseg {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using MapRow = Eigen::Map<RowMat<T>>;
template <typename T>
using MapRowC = Eigen::Map<const RowMat<T>>;
template <typename T>
using MapVec = Eigen::Map<Vec<T>>;
template <typename T>
using MapVecC = Eigen::Map<const Vec<T>>;

int conv_extent(int in, int k, int stride, int pad) { return (in + 2 * pad - k) / stride + 1; }
int pool_extent(int in, int k, int stride) { return in < k ? 0 : (in - k) / stride + 1; }

template <typename T>
void im2col(const T* in, const TensorShape& s, int k, int stride, int pad, const TensorShape& o, T* cols) {
  const int plane = o.height * o.width;
  for (int c = 0; c < s.channels; ++c) {
    const T* src = in + static_cast<std::size_t>(c) * s.height * s.width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * plane;
        for (int oy = 0; oy < o.height; ++oy) {
          const int iy = oy * stride - pad + ky;
          T* drow = dst + oy * o.width;
          if (iy < 0 || iy >= s.height) {
            std::fill_n(drow, o.width, T{0});
            continue;
          }
          const T* srow = src + static_cast<std::size_t>(iy) * s.width;
          for (int ox = 0; ox < o.width; ++ox) {
            const int ix = ox * stride - pad + kx;
            drow[ox] = (ix >= 0 && ix < s.width) ? srow[ix] : T{0};
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const TensorShape& s, int k, int stride, int pad, const TensorShape& o, T* din) {
  const int plane = o.height * o.width;
  for (int c = 0; c < s.channels; ++c) {
    T* dst = din + static_cast<std::size_t>(c) * s.height * s.width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * plane;
        for (int oy = 0; oy < o.height; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= s.height) continue;
          T* drow = dst + static_cast<std::size_t>(iy) * s.width;
          const T* srow = src + oy * o.width;
          for (int ox = 0; ox < o.width; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < s.width) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

// Activations of one sample through the conv stack.
template <typename T>
struct ConvTrace {
  std::vector<std::vector<T>> conv_out;  // post-ReLU, pre-pool
  std::vector<std::vector<T>> pool_out;  // empty when the stage has no pool
  std::vector<std::vector<int>> argmax;
};

template <typename T>
void conv_stage_forward(const ConvSpec& spec, const ConvOffsets& off, std::span<const T> params, const T* in,
                        std::vector<T>& cols, std::vector<T>& out) {
  const int k = spec.kernel;
  const std::size_t kk = static_cast<std::size_t>(off.in.channels) * k * k;
  const std::size_t plane = static_cast<std::size_t>(off.conv_out.height) * off.conv_out.width;
  cols.resize(kk * plane);
  im2col(in, off.in, k, spec.stride, spec.pad, off.conv_out, cols.data());
  out.resize(off.conv_out.volume());
  MapRowC<T> w(params.data() + off.weight, spec.filters, static_cast<Eigen::Index>(kk));
  MapVecC<T> b(params.data() + off.bias, spec.filters);
  MapRowC<T> c(cols.data(), static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(plane));
  MapRow<T> o(out.data(), spec.filters, static_cast<Eigen::Index>(plane));
  o.noalias() = w * c;
  o.colwise() += b;
  for (T& v : out) v = v > T{0} ? v : T{0};
}

template <typename T>
void max_pool_forward(const std::vector<T>& in, const TensorShape& s, const TensorShape& o, int k, int stride,
                      std::vector<T>& out, std::vector<int>* argmax) {
  out.resize(o.volume());
  if (argmax) argmax->resize(o.volume());
  for (int c = 0; c < o.channels; ++c) {
    const T* src = in.data() + static_cast<std::size_t>(c) * s.height * s.width;
    for (int oy = 0; oy < o.height; ++oy) {
      for (int ox = 0; ox < o.width; ++ox) {
        int best = (oy * stride) * s.width + ox * stride;
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            const int idx = (oy * stride + ky) * s.width + ox * stride + kx;
            if (src[idx] > src[best]) best = idx;
          }
        }
        const std::size_t oi = (static_cast<std::size_t>(c) * o.height + oy) * o.width + ox;
        out[oi] = src[best];
        if (argmax) (*argmax)[oi] = static_cast<int>(static_cast<std::size_t>(c) * s.height * s.width + best);
      }
    }
  }
}

// Runs the conv stack on one sample; returns the flattened final activation.
template <typename T>
std::vector<T> conv_stack_forward(const Architecture& arch, const ParameterLayout& layout, std::span<const T> params,
                                  std::span<const T> image, ConvTrace<T>* trace) {
  std::vector<T> current(image.begin(), image.end());
  std::vector<T> cols;
  std::vector<T> conv;
  std::vector<T> pooled;
  for (std::size_t l = 0; l < arch.convs.size(); ++l) {
    const ConvSpec& spec = arch.convs[l];
    const ConvOffsets& off = layout.convs[l];
    conv_stage_forward(spec, off, params, current.data(), cols, conv);
    if (spec.pool) {
      std::vector<int> am;
      max_pool_forward(conv, off.conv_out, off.out, arch.pool_kernel, arch.pool_stride, pooled,
                       trace ? &am : nullptr);
      if (trace) {
        trace->conv_out.push_back(conv);
        trace->pool_out.push_back(pooled);
        trace->argmax.push_back(std::move(am));
      }
      current.swap(pooled);
    } else {
      if (trace) {
        trace->conv_out.push_back(conv);
        trace->pool_out.emplace_back();
        trace->argmax.emplace_back();
      }
      current.swap(conv);
    }
  }
  return current;
}

template <typename T>
void conv_stack_backward(const Architecture& arch, const ParameterLayout& layout, std::span<const T> params,
                         std::span<const T> image, const ConvTrace<T>& trace, std::vector<T> dout,
                         std::span<T> grad) {
  std::vector<T> cols;
  std::vector<T> dcols;
  for (std::size_t li = arch.convs.size(); li-- > 0;) {
    const ConvSpec& spec = arch.convs[li];
    const ConvOffsets& off = layout.convs[li];
    std::vector<T> dconv;
    if (spec.pool) {
      dconv.assign(off.conv_out.volume(), T{0});
      const auto& am = trace.argmax[li];
      for (std::size_t i = 0; i < dout.size(); ++i) dconv[static_cast<std::size_t>(am[i])] += dout[i];
    } else {
      dconv = std::move(dout);
    }
    const auto& act = trace.conv_out[li];
    for (std::size_t i = 0; i < dconv.size(); ++i) {
      if (!(act[i] > T{0})) dconv[i] = T{0};
    }
    const T* input = li == 0 ? image.data()
                             : (arch.convs[li - 1].pool ? trace.pool_out[li - 1].data() : trace.conv_out[li - 1].data());
    const int k = spec.kernel;
    const std::size_t kk = static_cast<std::size_t>(off.in.channels) * k * k;
    const std::size_t plane = static_cast<std::size_t>(off.conv_out.height) * off.conv_out.width;
    cols.resize(kk * plane);
    im2col(input, off.in, k, spec.stride, spec.pad, off.conv_out, cols.data());
    MapRowC<T> c(cols.data(), static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(plane));
    MapRowC<T> d(dconv.data(), spec.filters, static_cast<Eigen::Index>(plane));
    MapRow<T> gw(grad.data() + off.weight, spec.filters, static_cast<Eigen::Index>(kk));
    MapVec<T> gb(grad.data() + off.bias, spec.filters);
    gw.noalias() += d * c.transpose();
    gb += d.rowwise().sum();
    if (li == 0) break;
    MapRowC<T> w(params.data() + off.weight, spec.filters, static_cast<Eigen::Index>(kk));
    dcols.resize(kk * plane);
    MapRow<T> dc(dcols.data(), static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(plane));
    dc.noalias() = w.transpose() * d;
    dout.assign(off.in.volume(), T{0});
    col2im_add(dcols.data(), off.in, k, spec.stride, spec.pad, off.conv_out, dout.data());
  }
}

template <typename T>
void dense_forward_batch(const DenseOffsets& off, std::span<const T> params, const RowMat<T>& x, RowMat<T>& z,
                         bool relu) {
  MapRowC<T> w(params.data() + off.weight, off.out, off.in);
  MapVecC<T> b(params.data() + off.bias, off.out);
  z.noalias() = x * w.transpose();
  z.rowwise() += b.transpose();
  if (relu) z = z.cwiseMax(T{0});
}

// dz is the gradient w.r.t. the layer output after the activation mask has
// been applied. Returns the gradient w.r.t. the layer input.
template <typename T>
RowMat<T> dense_backward_batch(const DenseOffsets& off, std::span<const T> params, const RowMat<T>& x,
                               const RowMat<T>& dz, std::span<T> grad) {
  MapRowC<T> w(params.data() + off.weight, off.out, off.in);
  MapRow<T> gw(grad.data() + off.weight, off.out, off.in);
  MapVec<T> gb(grad.data() + off.bias, off.out);
  gw.noalias() += dz.transpose() * x;
  gb += dz.colwise().sum().transpose();
  return dz * w;
}

template <typename T>
std::vector<T> dense_forward_single(const DenseOffsets& off, std::span<const T> params, const std::vector<T>& x,
                                    bool relu) {
  MapRowC<T> w(params.data() + off.weight, off.out, off.in);
  MapVecC<T> b(params.data() + off.bias, off.out);
  std::vector<T> out(static_cast<std::size_t>(off.out));
  MapVec<T> o(out.data(), off.out);
  o.noalias() = w * MapVecC<T>(x.data(), off.in);
  o += b;
  if (relu) o = o.cwiseMax(T{0});
  return out;
}

}  // namespace

Architecture Architecture::alexnet_like(int input_size) {
  Architecture a;
  a.name = "alexnet_like";
  a.input_size = input_size;
  a.convs = {{96, 11, 4, 0, true}, {256, 5, 1, 2, true}, {384, 3, 1, 1, false}, {384, 3, 1, 1, false},
             {256, 3, 1, 1, true}};
  a.branch_fc = {1024, 512};
  a.head_fc = {256};
  return a;
}

Architecture Architecture::compact(int input_size) {
  Architecture a;
  a.name = "compact";
  a.input_size = input_size;
  a.convs = {{16, 7, 2, 0, true}, {32, 5, 1, 2, true}, {48, 3, 1, 1, false}, {48, 3, 1, 1, false},
             {32, 3, 1, 1, true}};
  a.branch_fc = {1024, 512};
  a.head_fc = {256};
  return a;
}

Architecture Architecture::miniature() {
  Architecture a;
  a.name = "miniature";
  a.input_size = 8;
  a.convs = {{3, 3, 1, 1, true}, {4, 3, 1, 1, false}};
  a.branch_fc = {6, 4};
  a.head_fc = {5};
  return a;
}

int Architecture::embedding_size() const { return branch_fc.empty() ? 0 : branch_fc.back(); }

std::vector<TensorShape> Architecture::stage_shapes() const {
  std::vector<TensorShape> shapes;
  TensorShape s{1, input_size, input_size};
  for (const auto& c : convs) {
    s = {c.filters, conv_extent(s.height, c.kernel, c.stride, c.pad), conv_extent(s.width, c.kernel, c.stride, c.pad)};
    if (c.pool) s = {s.channels, pool_extent(s.height, pool_kernel, pool_stride), pool_extent(s.width, pool_kernel, pool_stride)};
    shapes.push_back(s);
  }
  return shapes;
}

void Architecture::validate() const {
  if (input_size <= 0) throw ConfigError("input_size must be positive");
  if (branch_fc.empty()) throw ConfigError("branch needs at least one fully connected layer");
  if (pool_kernel < 1 || pool_stride < 1) throw ConfigError("invalid pooling parameters");
  TensorShape s{1, input_size, input_size};
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const auto& c = convs[i];
    if (c.filters < 1 || c.kernel < 1 || c.stride < 1 || c.pad < 0) {
      throw ConfigError("invalid conv layer " + std::to_string(i + 1));
    }
    const int h = conv_extent(s.height, c.kernel, c.stride, c.pad);
    if (s.height + 2 * c.pad < c.kernel || h < 1) {
      throw ConfigError("conv layer " + std::to_string(i + 1) + " collapses the " + std::to_string(input_size) +
                        "px input");
    }
    s = {c.filters, h, h};
    if (c.pool) {
      const int p = pool_extent(h, pool_kernel, pool_stride);
      if (p < 1) throw ConfigError("pool after conv layer " + std::to_string(i + 1) + " collapses the input");
      s = {c.filters, p, p};
    }
  }
  for (int n : branch_fc) {
    if (n < 1) throw ConfigError("fully connected widths must be positive");
  }
  for (int n : head_fc) {
    if (n < 1) throw ConfigError("fully connected widths must be positive");
  }
}

ParameterLayout ParameterLayout::build(const Architecture& arch) {
  arch.validate();
  ParameterLayout L;
  std::size_t cursor = 0;
  TensorShape s{1, arch.input_size, arch.input_size};
  for (const auto& c : arch.convs) {
    ConvOffsets o;
    o.in = s;
    o.conv_out = {c.filters, conv_extent(s.height, c.kernel, c.stride, c.pad), conv_extent(s.width, c.kernel, c.stride, c.pad)};
    o.out = c.pool ? TensorShape{c.filters, pool_extent(o.conv_out.height, arch.pool_kernel, arch.pool_stride),
                                 pool_extent(o.conv_out.width, arch.pool_kernel, arch.pool_stride)}
                   : o.conv_out;
    o.weight = cursor;
    cursor += static_cast<std::size_t>(c.filters) * s.channels * c.kernel * c.kernel;
    o.bias = cursor;
    cursor += static_cast<std::size_t>(c.filters);
    L.convs.push_back(o);
    s = o.out;
  }
  int width = static_cast<int>(s.volume());
  auto add_dense = [&](std::vector<DenseOffsets>& into, int in, int out) {
    DenseOffsets d;
    d.in = in;
    d.out = out;
    d.weight = cursor;
    cursor += static_cast<std::size_t>(in) * out;
    d.bias = cursor;
    cursor += static_cast<std::size_t>(out);
    into.push_back(d);
  };
  for (int n : arch.branch_fc) {
    add_dense(L.branch_fc, width, n);
    width = n;
  }
  L.branch_size = cursor;
  width = 2 * arch.embedding_size();
  for (int n : arch.head_fc) {
    add_dense(L.head_fc, width, n);
    width = n;
  }
  add_dense(L.head_fc, width, 1);
  L.total_size = cursor;
  return L;
}

template <typename T>
T sigmoid(T z) {
  if (z >= T{0}) {
    const T e = std::exp(-z);
    return T{1} / (T{1} + e);
  }
  const T e = std::exp(z);
  return e / (T{1} + e);
}

template <typename T>
T binary_cross_entropy_logit(T logit, int label) {
  // softplus(z) - y z, computed without overflow.
  const T softplus = std::max(logit, T{0}) + std::log1p(std::exp(-std::abs(logit)));
  return softplus - static_cast<T>(label) * logit;
}

template <typename T>
std::vector<T> branch_embed(const Architecture& arch, const ParameterLayout& layout, std::span<const T> params,
                            std::span<const T> image) {
  const std::size_t expect = static_cast<std::size_t>(arch.input_size) * arch.input_size;
  if (image.size() != expect) {
    throw ShapeError("patch has " + std::to_string(image.size()) + " pixels, model expects " +
                     std::to_string(arch.input_size) + "x" + std::to_string(arch.input_size));
  }
  if (params.size() < layout.branch_size) throw ShapeError("parameter buffer shorter than branch");
  std::vector<T> x = conv_stack_forward<T>(arch, layout, params, image, nullptr);
  for (const auto& d : layout.branch_fc) x = dense_forward_single<T>(d, params, x, true);
  return x;
}

template <typename T>
SiameseNetwork<T>::SiameseNetwork(Architecture arch, std::uint64_t init_seed)
    : arch_(std::move(arch)), layout_(ParameterLayout::build(arch_)), params_(layout_.total_size, T{0}) {
  std::mt19937_64 rng(init_seed);
  auto fill = [&](std::size_t offset, std::size_t count, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (std::size_t i = 0; i < count; ++i) params_[offset + i] = static_cast<T>(dist(rng));
  };
  for (std::size_t l = 0; l < layout_.convs.size(); ++l) {
    const auto& o = layout_.convs[l];
    const std::size_t fan_in = static_cast<std::size_t>(o.in.channels) * arch_.convs[l].kernel * arch_.convs[l].kernel;
    fill(o.weight, fan_in * arch_.convs[l].filters, std::sqrt(2.0 / static_cast<double>(fan_in)));
  }
  for (const auto& d : layout_.branch_fc) {
    fill(d.weight, static_cast<std::size_t>(d.in) * d.out, std::sqrt(2.0 / d.in));
  }
  for (std::size_t i = 0; i < layout_.head_fc.size(); ++i) {
    const auto& d = layout_.head_fc[i];
    const bool last = i + 1 == layout_.head_fc.size();
    fill(d.weight, static_cast<std::size_t>(d.in) * d.out, std::sqrt((last ? 1.0 : 2.0) / d.in));
  }
}

template <typename T>
SiameseNetwork<T>::SiameseNetwork(Architecture arch, std::vector<T> params)
    : arch_(std::move(arch)), layout_(ParameterLayout::build(arch_)), params_(std::move(params)) {
  if (params_.size() != layout_.total_size) {
    throw ShapeError("parameter count " + std::to_string(params_.size()) + " does not match architecture (" +
                     std::to_string(layout_.total_size) + ")");
  }
}

template <typename T>
std::vector<T> SiameseNetwork<T>::embed(std::span<const T> image) const {
  return branch_embed<T>(arch_, layout_, params_, image);
}

template <typename T>
T SiameseNetwork<T>::head_logit(std::span<const T> emb_a, std::span<const T> emb_b) const {
  const auto e = static_cast<std::size_t>(arch_.embedding_size());
  if (emb_a.size() != e || emb_b.size() != e) throw ShapeError("embedding width mismatch");
  std::vector<T> x(emb_a.begin(), emb_a.end());
  x.insert(x.end(), emb_b.begin(), emb_b.end());
  for (std::size_t i = 0; i < layout_.head_fc.size(); ++i) {
    x = dense_forward_single<T>(layout_.head_fc[i], params_, x, i + 1 < layout_.head_fc.size());
  }
  return x[0];
}

template <typename T>
T SiameseNetwork<T>::pair_probability(std::span<const T> image_a, std::span<const T> image_b) const {
  const auto ea = embed(image_a);
  const auto eb = embed(image_b);
  const T p = sigmoid(head_logit(ea, eb));
  // Keep the probability inside the open interval (0,1) at working precision.
  return std::clamp(p, std::numeric_limits<T>::min(), T{1} - std::numeric_limits<T>::epsilon());
}

template <typename T>
T SiameseNetwork<T>::batch_loss(std::span<const T* const> images_a, std::span<const T* const> images_b,
                                std::span<const int> labels, std::span<T> grad, std::span<T> logits) const {
  const std::size_t n = labels.size();
  if (n == 0 || images_a.size() != n || images_b.size() != n) throw ShapeError("batch size mismatch");
  if (!grad.empty() && grad.size() != params_.size()) throw ShapeError("gradient buffer size mismatch");
  if (!logits.empty() && logits.size() != n) throw ShapeError("logit buffer size mismatch");
  const bool backward = !grad.empty();
  if (backward) std::fill(grad.begin(), grad.end(), T{0});
  const std::size_t m = 2 * n;
  const std::span<const T> params(params_);
  const std::size_t in_vol = input_volume();

  auto image_at = [&](std::size_t i) -> std::span<const T> {
    return {i < n ? images_a[i] : images_b[i - n], in_vol};
  };

  // Twin branches share one parameter set: a-patches occupy rows [0,n), b-patches [n,2n).
  std::vector<ConvTrace<T>> traces(backward ? m : 0);
  const int flat = layout_.branch_fc.front().in;
  RowMat<T> x0(static_cast<Eigen::Index>(m), flat);
  for (std::size_t i = 0; i < m; ++i) {
    const auto out = conv_stack_forward<T>(arch_, layout_, params, image_at(i), backward ? &traces[i] : nullptr);
    x0.row(static_cast<Eigen::Index>(i)) = MapVecC<T>(out.data(), flat).transpose();
  }
  std::vector<RowMat<T>> bacts{x0};
  for (const auto& d : layout_.branch_fc) {
    RowMat<T> z;
    dense_forward_batch<T>(d, params, bacts.back(), z, true);
    bacts.push_back(std::move(z));
  }
  const RowMat<T>& emb = bacts.back();
  const int e = arch_.embedding_size();
  RowMat<T> h0(static_cast<Eigen::Index>(n), 2 * e);
  h0.leftCols(e) = emb.topRows(static_cast<Eigen::Index>(n));
  h0.rightCols(e) = emb.bottomRows(static_cast<Eigen::Index>(n));
  std::vector<RowMat<T>> hacts{h0};
  for (std::size_t i = 0; i < layout_.head_fc.size(); ++i) {
    RowMat<T> z;
    dense_forward_batch<T>(layout_.head_fc[i], params, hacts.back(), z, i + 1 < layout_.head_fc.size());
    hacts.push_back(std::move(z));
  }
  const RowMat<T>& z = hacts.back();

  T loss{0};
  RowMat<T> dz(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    const T zi = z(static_cast<Eigen::Index>(i), 0);
    loss += binary_cross_entropy_logit(zi, labels[i]);
    dz(static_cast<Eigen::Index>(i), 0) = (sigmoid(zi) - static_cast<T>(labels[i])) / static_cast<T>(n);
    if (!logits.empty()) logits[i] = zi;
  }
  loss /= static_cast<T>(n);
  if (!backward) return loss;

  RowMat<T> d = dz;
  for (std::size_t i = layout_.head_fc.size(); i-- > 0;) {
    if (i + 1 < layout_.head_fc.size()) d = (hacts[i + 1].array() > T{0}).select(d, T{0});
    d = dense_backward_batch<T>(layout_.head_fc[i], params, hacts[i], d, grad);
  }
  RowMat<T> demb(static_cast<Eigen::Index>(m), e);
  demb.topRows(static_cast<Eigen::Index>(n)) = d.leftCols(e);
  demb.bottomRows(static_cast<Eigen::Index>(n)) = d.rightCols(e);
  d = std::move(demb);
  for (std::size_t i = layout_.branch_fc.size(); i-- > 0;) {
    d = (bacts[i + 1].array() > T{0}).select(d, T{0});
    d = dense_backward_batch<T>(layout_.branch_fc[i], params, bacts[i], d, grad);
  }
  if (arch_.convs.empty()) return loss;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<T> dout(static_cast<std::size_t>(flat));
    MapVec<T>(dout.data(), flat) = d.row(static_cast<Eigen::Index>(i)).transpose();
    conv_stack_backward<T>(arch_, layout_, params, image_at(i), traces[i], std::move(dout), grad);
  }
  return loss;
}

template float sigmoid<float>(float);
template double sigmoid<double>(double);
template float binary_cross_entropy_logit<float>(float, int);
template double binary_cross_entropy_logit<double>(double, int);
template std::vector<float> branch_embed<float>(const Architecture&, const ParameterLayout&, std::span<const float>,
                                                std::span<const float>);
template std::vector<double> branch_embed<double>(const Architecture&, const ParameterLayout&,
                                                  std::span<const double>, std::span<const double>);
template class SiameseNetwork<float>;
template class SiameseNetwork<double>;

}  // namespace pageseg
