#include "embloc/depth_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "embloc/error.hpp"

namespace embloc {
namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return f;
}

// Rows are given as packed big-endian samples, as PNG stores them.
void write_png(const fs::path& path, int width, int height, int bit_depth, int color_type,
               const std::vector<std::uint8_t>& bytes) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw Error(ErrorCode::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::Io, "png_create_info_struct failed");
  }
  const std::size_t channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(bytes.data() + stride * static_cast<std::size_t>(y));
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "libpng failed writing " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct RawPng {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<std::uint8_t> bytes;
};

RawPng read_png(const fs::path& path) {
  FilePtr f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw Error(ErrorCode::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::Io, "png_create_info_struct failed");
  }
  RawPng out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Format, "libpng failed reading " + path.string());
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  out.color_type = png_get_color_type(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + stride * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

fs::path sidecar_path(const fs::path& image) {
  fs::path p = image;
  p.replace_extension(".json");
  return p;
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

void write_depth_png(const fs::path& path, const DepthMap& d) {
  std::vector<std::uint8_t> bytes(2 * d.size());
  const auto values = d.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0xFFFF) {
      throw Error(ErrorCode::DepthOverflow,
                  "depth " + std::to_string(values[i]) + " mm does not fit a 16-bit PNG");
    }
    bytes[2 * i] = static_cast<std::uint8_t>(values[i] >> 8);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(values[i]);
  }
  write_png(path, d.width(), d.height(), 16, PNG_COLOR_TYPE_GRAY, bytes);
  write_json_file(sidecar_path(path), {{"format", "png16"},
                                       {"units", "mm"},
                                       {"hole_value", 0},
                                       {"width", d.width()},
                                       {"height", d.height()}});
}

DepthMap read_depth_png(const fs::path& path) {
  const fs::path side = sidecar_path(path);
  if (fs::exists(side)) {
    const auto j = read_json_file(side);
    if (j.value("units", std::string("mm")) != "mm") {
      throw Error(ErrorCode::Format, side.string() + ": depth units must be mm");
    }
  }
  const RawPng raw = read_png(path);
  if (raw.color_type != PNG_COLOR_TYPE_GRAY || (raw.bit_depth != 16 && raw.bit_depth != 8)) {
    throw Error(ErrorCode::Format, path.string() + ": expected 8- or 16-bit grayscale depth");
  }
  std::vector<std::uint32_t> values(static_cast<std::size_t>(raw.width) * raw.height);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = raw.bit_depth == 16
                    ? (std::uint32_t{raw.bytes[2 * i]} << 8) | raw.bytes[2 * i + 1]
                    : std::uint32_t{raw.bytes[i]};
  }
  return DepthMap(raw.width, raw.height, std::move(values));
}

nlohmann::json depth24_layout() {
  return {{"encoding", "depth24_be"},
          {"units", "mm"},
          {"channels", {"Z >> 16", "(Z >> 8) & 255", "Z & 255"}}};
}

void write_encoded_depth_png(const fs::path& path, const EncodedDepthImage& e,
                             const nlohmann::json& layout) {
  write_rgb_png(path, e.width, e.height, e.data);
  write_json_file(sidecar_path(path), layout);
}

void write_rgb_png(const fs::path& path, int width, int height, std::span<const std::uint8_t> rgb) {
  if (rgb.size() != 3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidArgument, "RGB buffer size does not match image size");
  }
  write_png(path, width, height, 8, PNG_COLOR_TYPE_RGB, std::vector<std::uint8_t>(rgb.begin(), rgb.end()));
}

EncodedDepthImage read_rgb_png(const fs::path& path) {
  RawPng raw = read_png(path);
  if (raw.color_type != PNG_COLOR_TYPE_RGB || raw.bit_depth != 8) {
    throw Error(ErrorCode::Format, path.string() + ": expected 8-bit RGB");
  }
  return {raw.width, raw.height, std::move(raw.bytes)};
}

void write_intrinsics(const fs::path& path, const CameraIntrinsics& cam) {
  write_json_file(path, to_json(cam));
}

CameraIntrinsics read_intrinsics(const fs::path& path) { return intrinsics_from_json(read_json_file(path)); }

}  // namespace embloc
