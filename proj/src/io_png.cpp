#include <png.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <optional>
#include <system_error>

#include "io_detail.hpp"
#include "normal_forge/errors.hpp"
#include "normal_forge/io.hpp"

namespace normal_forge {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  int channels = 0;
};

struct PngMessage {
  char text[256] = {};
};

// Samples stored row-major, interleaved, one uint16 per channel sample
// regardless of bit depth.
struct PngImage {
  PngHeader header;
  std::vector<std::uint16_t> samples;
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* message = static_cast<PngMessage*>(png_get_error_ptr(png));
  if (message != nullptr) {
    std::snprintf(message->text, sizeof(message->text), "%s", msg);
  }
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// The helpers below hold only trivially destructible locals so that a libpng
// longjmp never skips a destructor.
bool png_read_header(png_structp png, png_infop info, std::FILE* fp, PngHeader* h) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_read_info(png, info);
  h->width = png_get_image_width(png, info);
  h->height = png_get_image_height(png, info);
  h->bit_depth = png_get_bit_depth(png, info);
  h->color_type = png_get_color_type(png, info);
  h->channels = png_get_channels(png, info);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  return true;
}

bool png_read_rows(png_structp png, png_infop info, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, info);
  return true;
}

bool png_write_all(png_structp png, png_infop info, std::FILE* fp, const PngHeader* h,
                   png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_set_IHDR(png, info, h->width, h->height, h->bit_depth, h->color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, info);
  return true;
}

PngImage read_png(const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));

  unsigned char signature[8];
  if (std::fread(signature, 1, 8, fp.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw FormatError(path.string() + ": not a PNG file");
  }

  PngMessage message;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (png == nullptr) throw IoError("libpng: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng: cannot create info struct");
  }
  png_set_sig_bytes(png, 8);

  PngImage img;
  if (!png_read_header(png, info, fp.get(), &img.header)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": " + message.text);
  }
  const PngHeader& h = img.header;
  const std::size_t bytes_per_sample = h.bit_depth == 16 ? 2 : 1;
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buffer(row_bytes * h.height);
  std::vector<png_bytep> rows(h.height);
  for (png_uint_32 y = 0; y < h.height; ++y) rows[y] = buffer.data() + y * row_bytes;
  if (!png_read_rows(png, info, rows.data())) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": " + message.text);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (h.bit_depth != 8 && h.bit_depth != 16) return img;  // caller rejects
  const std::size_t samples_per_row = static_cast<std::size_t>(h.width) * h.channels;
  img.samples.resize(samples_per_row * h.height);
  for (png_uint_32 y = 0; y < h.height; ++y) {
    const png_byte* src = rows[y];
    for (std::size_t i = 0; i < samples_per_row; ++i) {
      img.samples[y * samples_per_row + i] =
          bytes_per_sample == 2
              ? static_cast<std::uint16_t>((src[2 * i] << 8) | src[2 * i + 1])
              : static_cast<std::uint16_t>(src[i]);
    }
  }
  return img;
}

void write_png(const PngImage& img, const fs::path& path) {
  const PngHeader& h = img.header;
  const std::size_t bytes_per_sample = h.bit_depth == 16 ? 2 : 1;
  const std::size_t samples_per_row = static_cast<std::size_t>(h.width) * h.channels;
  const std::size_t row_bytes = samples_per_row * bytes_per_sample;
  std::vector<png_byte> buffer(row_bytes * h.height);
  std::vector<png_bytep> rows(h.height);
  for (png_uint_32 y = 0; y < h.height; ++y) {
    png_byte* dst = buffer.data() + y * row_bytes;
    rows[y] = dst;
    for (std::size_t i = 0; i < samples_per_row; ++i) {
      const std::uint16_t v = img.samples[y * samples_per_row + i];
      if (bytes_per_sample == 2) {
        dst[2 * i] = static_cast<png_byte>(v >> 8);
        dst[2 * i + 1] = static_cast<png_byte>(v & 0xff);
      } else {
        dst[i] = static_cast<png_byte>(v);
      }
    }
  }

  const fs::path tmp = detail::temp_path_for(path);
  {
    FilePtr fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) throw IoError("cannot create " + tmp.string() + ": " + std::strerror(errno));
    PngMessage message;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
    png_infop info = png == nullptr ? nullptr : png_create_info_struct(png);
    const bool ok = info != nullptr && png_write_all(png, info, fp.get(), &h, rows.data());
    png_destroy_write_struct(&png, &info);
    const bool flushed = std::fflush(fp.get()) == 0;
    if (!ok || !flushed) {
      fp.reset();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("cannot write " + path.string() + ": " + message.text);
    }
  }
  detail::commit_file(tmp, path);
}

void require_layout(const PngImage& img, const fs::path& path, int bit_depth, int color_type,
                    const char* expected) {
  if (img.header.bit_depth != bit_depth || img.header.color_type != color_type) {
    throw FormatError(path.string() + ": expected " + expected + " PNG (got bit depth " +
                      std::to_string(img.header.bit_depth) + ", color type " +
                      std::to_string(img.header.color_type) + ")");
  }
}

PngImage make_png(int width, int height, int bit_depth, int color_type, int channels) {
  PngImage img;
  img.header = {static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                color_type, channels};
  img.samples.assign(static_cast<std::size_t>(width) * height * channels, 0);
  return img;
}

void require_writable_size(int width, int height, const fs::path& path) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("cannot write empty image to " + path.string());
  }
}

}  // namespace

namespace detail {

fs::path temp_path_for(const fs::path& target) {
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  return tmp;
}

void commit_file(const fs::path& tmp, const fs::path& target) {
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot move " + tmp.string() + " to " + target.string() + ": " + ec.message());
  }
}

}  // namespace detail

std::uint16_t encode_fixed256(double value) {
  const double scaled = std::round(value * 256.0);
  if (!(scaled >= 1.0)) return 1;
  if (scaled >= 65535.0) return 65535;
  return static_cast<std::uint16_t>(scaled);
}

std::uint16_t encode_normal_component(double c) {
  const double v = std::floor((c + 1.0) * 0.5 * 65535.0 + 0.5);
  if (!(v >= 0.0)) return 0;
  if (v >= 65535.0) return 65535;
  return static_cast<std::uint16_t>(v);
}

double decode_normal_component(std::uint16_t v) { return v / 65535.0 * 2.0 - 1.0; }

namespace {

using NormalCode = std::array<std::uint16_t, 3>;

Vec3 decode_normal(const NormalCode& code) {
  const Vec3 n{decode_normal_component(code[0]), decode_normal_component(code[1]),
               decode_normal_component(code[2])};
  return n / norm(n);
}

NormalCode nearest_code(const Vec3& n) {
  return {encode_normal_component(n.x), encode_normal_component(n.y),
          encode_normal_component(n.z)};
}

// First code near nearest_code(target), that code itself first, whose decoded
// form equals target exactly.
std::optional<NormalCode> canonical_code(const Vec3& target) {
  const NormalCode start = nearest_code(target);
  if (decode_normal(start) == target) return start;
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        const int v[3] = {start[0] + dx, start[1] + dy, start[2] + dz};
        if (std::min({v[0], v[1], v[2]}) < 0 || std::max({v[0], v[1], v[2]}) > 65535) continue;
        const NormalCode code{static_cast<std::uint16_t>(v[0]), static_cast<std::uint16_t>(v[1]),
                              static_cast<std::uint16_t>(v[2])};
        if (code != NormalCode{0, 0, 0} && decode_normal(code) == target) return code;
      }
    }
  }
  return std::nullopt;
}

// Per-channel rounding, canonicalized. Reading renormalizes, so a vector that
// came out of read_normal_png is mapped back to the code it was read from,
// and collinear codes such as (k, k, k), which all decode alike, collapse to
// one. This makes read -> write a fixed point.
NormalCode encode_normal(const Vec3& n) {
  if (auto code = canonical_code(n)) return *code;
  const NormalCode rounded = nearest_code(n);
  return canonical_code(decode_normal(rounded)).value_or(rounded);
}

}  // namespace

DepthImage read_depth_png(const fs::path& path) {
  const PngImage img = read_png(path);
  require_layout(img, path, 16, PNG_COLOR_TYPE_GRAY, "16-bit single-channel");
  const int w = static_cast<int>(img.header.width);
  const int h = static_cast<int>(img.header.height);
  DepthImage out(w, h);
  auto depth = out.depth.values();
  auto valid = out.valid.values();
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (img.samples[i] == 0) continue;
    depth[i] = img.samples[i] / 256.0;
    valid[i] = 1;
  }
  return out;
}

void write_depth_png(const DepthImage& z, const fs::path& path) {
  require_writable_size(z.width(), z.height(), path);
  require_same_shape(z.depth, z.valid, "write_depth_png: data vs mask");
  PngImage img = make_png(z.width(), z.height(), 16, PNG_COLOR_TYPE_GRAY, 1);
  const auto depth = z.depth.values();
  const auto valid = z.valid.values();
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (valid[i] && depth[i] > 0.0 && std::isfinite(depth[i])) {
      img.samples[i] = encode_fixed256(depth[i]);
    }
  }
  write_png(img, path);
}

DisparityImage read_disparity_png(const fs::path& path, double baseline) {
  if (!(baseline > 0.0)) throw InvalidArgument("read_disparity_png: baseline must be positive");
  const PngImage img = read_png(path);
  require_layout(img, path, 16, PNG_COLOR_TYPE_GRAY, "16-bit single-channel");
  const int w = static_cast<int>(img.header.width);
  const int h = static_cast<int>(img.header.height);
  DisparityImage out(w, h, baseline);
  auto disp = out.disparity.values();
  auto valid = out.valid.values();
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (img.samples[i] == 0) continue;
    disp[i] = img.samples[i] / 256.0;
    valid[i] = 1;
  }
  return out;
}

void write_disparity_png(const DisparityImage& d, const fs::path& path) {
  require_writable_size(d.width(), d.height(), path);
  require_same_shape(d.disparity, d.valid, "write_disparity_png: data vs mask");
  PngImage img = make_png(d.width(), d.height(), 16, PNG_COLOR_TYPE_GRAY, 1);
  const auto disp = d.disparity.values();
  const auto valid = d.valid.values();
  for (std::size_t i = 0; i < disp.size(); ++i) {
    if (valid[i] && disp[i] > 0.0 && std::isfinite(disp[i])) {
      img.samples[i] = encode_fixed256(disp[i]);
    }
  }
  write_png(img, path);
}

NormalMap read_normal_png(const fs::path& path) {
  const PngImage img = read_png(path);
  require_layout(img, path, 16, PNG_COLOR_TYPE_RGB, "16-bit 3-channel");
  const int w = static_cast<int>(img.header.width);
  const int h = static_cast<int>(img.header.height);
  NormalMap out(w, h);
  auto normals = out.normals.values();
  auto valid = out.valid.values();
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const std::uint16_t r = img.samples[3 * i];
    const std::uint16_t g = img.samples[3 * i + 1];
    const std::uint16_t b = img.samples[3 * i + 2];
    if (r == 0 && g == 0 && b == 0) continue;
    normals[i] = decode_normal({r, g, b});
    valid[i] = 1;
  }
  return out;
}

void write_normal_png(const NormalMap& nm, const fs::path& path) {
  require_writable_size(nm.width(), nm.height(), path);
  require_same_shape(nm.normals, nm.valid, "write_normal_png: data vs mask");
  PngImage img = make_png(nm.width(), nm.height(), 16, PNG_COLOR_TYPE_RGB, 3);
  const auto normals = nm.normals.values();
  const auto valid = nm.valid.values();
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!valid[i] || !is_finite(normals[i])) continue;
    const NormalCode code = encode_normal(normals[i]);
    std::copy(code.begin(), code.end(), img.samples.begin() + 3 * i);
  }
  write_png(img, path);
}

Mask read_mask_png(const fs::path& path) {
  const PngImage img = read_png(path);
  require_layout(img, path, 8, PNG_COLOR_TYPE_GRAY, "8-bit single-channel");
  Mask out(static_cast<int>(img.header.width), static_cast<int>(img.header.height), 0);
  auto values = out.values();
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    const std::uint16_t v = img.samples[i];
    if (v != 0 && v != 255) {
      const std::size_t x = i % img.header.width;
      const std::size_t y = i / img.header.width;
      throw FormatError(path.string() + ": mask value " + std::to_string(v) + " at (" +
                        std::to_string(x) + ", " + std::to_string(y) +
                        ") is neither 0 nor 255");
    }
    values[i] = v == 255 ? 1 : 0;
  }
  return out;
}

void write_mask_png(const Mask& mask, const fs::path& path) {
  require_writable_size(mask.width(), mask.height(), path);
  PngImage img = make_png(mask.width(), mask.height(), 8, PNG_COLOR_TYPE_GRAY, 1);
  const auto values = mask.values();
  for (std::size_t i = 0; i < values.size(); ++i) img.samples[i] = values[i] ? 255 : 0;
  write_png(img, path);
}

void write_rgb_png(const Raster<Rgb8>& image, const fs::path& path) {
  require_writable_size(image.width(), image.height(), path);
  PngImage img = make_png(image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, 3);
  const auto px = image.values();
  for (std::size_t i = 0; i < px.size(); ++i) {
    img.samples[3 * i] = px[i].r;
    img.samples[3 * i + 1] = px[i].g;
    img.samples[3 * i + 2] = px[i].b;
  }
  write_png(img, path);
}

}  // namespace normal_forge
