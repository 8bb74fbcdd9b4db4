#include "pageseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <opencv2/imgcodecs.hpp>
#include <string>

#include "pageseg/errors.hpp"

namespace pageseg {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

bool has_png_signature(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.string().c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path.string());
  png_byte sig[8] = {};
  if (std::fread(sig, 1, 8, f.get()) != 8) return false;
  return png_sig_cmp(sig, 0, 8) == 0;
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  auto* where = static_cast<std::string*>(png_get_error_ptr(png));
  if (where) *where = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

// Decodes a PNG into 8-bit samples without palette expansion.
struct DecodedPng {
  int width = 0;
  int height = 0;
  int color_type = 0;
  int channels = 0;
  std::vector<std::uint8_t> samples;
  std::vector<png_color> palette;
};

DecodedPng decode_png(const std::filesystem::path& path, bool rescale_low_depth_gray) {
  FilePtr f = open_file(path, "rb");
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
  if (!png) throw FormatError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng init failed");
  }
  DecodedPng out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG " + path.string() + ": " + err);
  }
  png_init_io(png, f.get());
  png_read_png(png, info, PNG_TRANSFORM_PACKING | PNG_TRANSFORM_STRIP_16, nullptr);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.color_type = png_get_color_type(png, info);
  out.channels = png_get_channels(png, info);
  png_bytepp rows = png_get_rows(png, info);
  out.samples.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
  const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
  for (int y = 0; y < out.height; ++y) {
    std::copy_n(rows[y], stride, out.samples.begin() + static_cast<std::ptrdiff_t>(y * stride));
  }
  if (out.color_type == PNG_COLOR_TYPE_PALETTE) {
    png_colorp pal = nullptr;
    int n = 0;
    if (png_get_PLTE(png, info, &pal, &n) != 0) out.palette.assign(pal, pal + n);
  }
  const int depth = png_get_bit_depth(png, info);
  png_destroy_read_struct(&png, &info, nullptr);
  // PACKING widens low bit depths to bytes without rescaling.
  if (rescale_low_depth_gray && out.color_type == PNG_COLOR_TYPE_GRAY && depth < 8) {
    const int scale = 255 / ((1 << depth) - 1);
    for (auto& s : out.samples) s = static_cast<std::uint8_t>(s * scale);
  }
  if (out.width <= 0 || out.height <= 0) throw FormatError("zero-dimension image " + path.string());
  return out;
}

void encode_png(const std::filesystem::path& path, int width, int height, int color_type,
                const std::uint8_t* samples, int channels, const Palette* palette) {
  if (width <= 0 || height <= 0) throw ShapeError("cannot write empty image " + path.string());
  FilePtr f = open_file(path, "wb");
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed");
  }
  std::vector<png_color> plte;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed for " + path.string() + ": " + err);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (palette) {
    for (const auto& c : *palette) plte.push_back(png_color{c[0], c[1], c[2]});
    png_set_PLTE(png, info, plte.data(), static_cast<int>(plte.size()));
  }
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    png_write_row(png, samples + static_cast<std::size_t>(y) * stride);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RgbImage read_rgb(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  RgbImage out;
  if (has_png_signature(path)) {
    DecodedPng png = decode_png(path, true);
    out.width = png.width;
    out.height = png.height;
    out.rgb.resize(static_cast<std::size_t>(png.width) * png.height * 3);
    const std::size_t n = static_cast<std::size_t>(png.width) * png.height;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint8_t r = 0, g = 0, b = 0;
      const std::uint8_t* s = png.samples.data() + i * png.channels;
      switch (png.color_type) {
        case PNG_COLOR_TYPE_GRAY:
        case PNG_COLOR_TYPE_GRAY_ALPHA:
          r = g = b = s[0];
          break;
        case PNG_COLOR_TYPE_PALETTE: {
          if (s[0] >= png.palette.size()) throw FormatError("palette index out of range in " + path.string());
          const png_color c = png.palette[s[0]];
          r = c.red;
          g = c.green;
          b = c.blue;
          break;
        }
        default:
          r = s[0];
          g = s[1];
          b = s[2];
      }
      out.rgb[3 * i] = r;
      out.rgb[3 * i + 1] = g;
      out.rgb[3 * i + 2] = b;
    }
    return out;
  }

  cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty()) throw IoError("cannot decode " + path.string());
  if (m.cols <= 0 || m.rows <= 0) throw FormatError("zero-dimension image " + path.string());
  out.width = m.cols;
  out.height = m.rows;
  out.rgb.resize(static_cast<std::size_t>(m.cols) * m.rows * 3);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) {
      const std::size_t o = (static_cast<std::size_t>(y) * m.cols + x) * 3;
      out.rgb[o] = row[3 * x + 2];
      out.rgb[o + 1] = row[3 * x + 1];
      out.rgb[o + 2] = row[3 * x];
    }
  }
  return out;
}

Grid<std::uint8_t> read_indexed_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  if (!has_png_signature(path)) throw FormatError("label map is not a PNG: " + path.string());
  DecodedPng png = decode_png(path, false);
  if (png.color_type != PNG_COLOR_TYPE_PALETTE && png.color_type != PNG_COLOR_TYPE_GRAY) {
    throw FormatError("label map must be indexed or grayscale: " + path.string());
  }
  Grid<std::uint8_t> out(png.width, png.height);
  std::copy(png.samples.begin(), png.samples.end(), out.data().begin());
  return out;
}

void write_gray_png(const std::filesystem::path& path, const Grid<std::uint8_t>& gray) {
  encode_png(path, gray.width(), gray.height(), PNG_COLOR_TYPE_GRAY, gray.data().data(), 1, nullptr);
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& img) {
  if (img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw ShapeError("RGB buffer size does not match dimensions");
  }
  encode_png(path, img.width, img.height, PNG_COLOR_TYPE_RGB, img.rgb.data(), 3, nullptr);
}

void write_indexed_png(const std::filesystem::path& path, const Grid<std::uint8_t>& indices,
                       const Palette& palette) {
  if (palette.empty() || palette.size() > 256) throw ConfigError("palette must hold 1..256 colors");
  for (auto v : indices.data()) {
    if (v >= palette.size()) throw ShapeError("index exceeds palette size");
  }
  encode_png(path, indices.width(), indices.height(), PNG_COLOR_TYPE_PALETTE, indices.data().data(), 1,
             &palette);
}

const Palette& label_palette() {
  static const Palette palette = {{255, 255, 255}, {220, 30, 30}, {30, 60, 220}};
  return palette;
}

}  // namespace pageseg
