#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "topoflow/error.hpp"
#include "topoflow/io.hpp"

namespace topoflow::io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) {
    if (mode[0] == 'r') throw Error(ErrorCode::FileNotFound, path.string());
    throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  }
  return f;
}

// Rows must outlive the call; no C++ object with a destructor is created
// between setjmp and the libpng calls that may longjmp.
bool write_rows(std::FILE* fp, int width, int height, int bit_depth, int color_type,
                std::vector<png_bytep>& rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // rows hold host little-endian u16
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_buffer(const std::filesystem::path& path, int width, int height, int bit_depth,
                  int color_type, std::vector<std::uint8_t>& bytes, std::size_t row_bytes) {
  if (width < 1 || height < 1) throw Error(ErrorCode::IoError, "cannot write an empty PNG");
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = bytes.data() + y * row_bytes;
  FilePtr fp = open_file(path, "wb");
  if (!write_rows(fp.get(), width, height, bit_depth, color_type, rows)) {
    throw Error(ErrorCode::IoError, "PNG encoding failed for " + path.string());
  }
  if (std::fflush(fp.get()) != 0) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

struct RawPng {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint8_t> bytes;
};

bool read_rows(std::FILE* fp, RawPng& out, std::vector<png_bytep>& rows) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  const bool gray = color == PNG_COLOR_TYPE_GRAY && !png_get_valid(png, info, PNG_INFO_tRNS);

  if (gray && depth == 16) {
    png_set_swap(png);
    out.channels = 1;
    out.bit_depth = 16;
  } else if (gray) {
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    out.channels = 1;
  } else {
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
    out.channels = 4;
  }
  png_read_update_info(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out.bytes.resize(row_bytes * out.height);
  rows.resize(out.height);
  for (png_uint_32 y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

void write_png(const Image& image, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(image.size() * 4);
  for (std::size_t i = 0; i < image.size(); ++i) {
    for (int c = 0; c < 4; ++c) bytes[4 * i + c] = image.data()[i][c];
  }
  write_buffer(path, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB_ALPHA, bytes,
               static_cast<std::size_t>(image.width()) * 4);
}

void write_mask_png(const Mask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask.data()[i] ? 255 : 0;
  write_buffer(path, mask.width(), mask.height(), 8, PNG_COLOR_TYPE_GRAY, bytes,
               static_cast<std::size_t>(mask.width()));
}

void write_gray16_png(const Grid<std::uint16_t>& gray, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(gray.size() * 2);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    bytes[2 * i] = static_cast<std::uint8_t>(gray.data()[i] & 0xFF);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(gray.data()[i] >> 8);
  }
  write_buffer(path, gray.width(), gray.height(), 16, PNG_COLOR_TYPE_GRAY, bytes,
               static_cast<std::size_t>(gray.width()) * 2);
}

DecodedPng read_png_any(const std::filesystem::path& path) {
  FilePtr fp = open_file(path, "rb");
  std::array<png_byte, 8> sig{};
  if (std::fread(sig.data(), 1, sig.size(), fp.get()) != sig.size() ||
      png_sig_cmp(sig.data(), 0, sig.size()) != 0) {
    throw Error(ErrorCode::BadMagic, path.string() + " is not a PNG file");
  }
  std::rewind(fp.get());

  RawPng raw;
  std::vector<png_bytep> rows;
  if (!read_rows(fp.get(), raw, rows)) {
    throw Error(ErrorCode::TruncatedPayload, "PNG decoding failed for " + path.string());
  }

  DecodedPng out;
  const int w = static_cast<int>(raw.width);
  const int h = static_cast<int>(raw.height);
  if (raw.channels == 4) {
    out.kind = DecodedPng::Kind::Rgba8;
    out.rgba = Image(w, h);
    for (std::size_t i = 0; i < out.rgba.size(); ++i) {
      for (int c = 0; c < 4; ++c) out.rgba.data()[i][c] = raw.bytes[4 * i + c];
    }
  } else if (raw.bit_depth == 16) {
    out.kind = DecodedPng::Kind::Gray16;
    out.gray16 = Grid<std::uint16_t>(w, h);
    for (std::size_t i = 0; i < out.gray16.size(); ++i) {
      out.gray16.data()[i] =
          static_cast<std::uint16_t>(raw.bytes[2 * i] | (raw.bytes[2 * i + 1] << 8));
    }
  } else {
    out.kind = DecodedPng::Kind::Gray8;
    out.gray = Grid<std::uint8_t>(w, h);
    std::copy(raw.bytes.begin(), raw.bytes.begin() + static_cast<std::ptrdiff_t>(out.gray.size()),
              out.gray.data().begin());
  }
  return out;
}

Image read_png(const std::filesystem::path& path) {
  DecodedPng png = read_png_any(path);
  if (png.kind == DecodedPng::Kind::Rgba8) return std::move(png.rgba);
  const bool gray8 = png.kind == DecodedPng::Kind::Gray8;
  const int w = gray8 ? png.gray.width() : png.gray16.width();
  const int h = gray8 ? png.gray.height() : png.gray16.height();
  Image out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto v = gray8 ? png.gray.data()[i]
                                     : static_cast<std::uint8_t>(png.gray16.data()[i] >> 8);
    out.data()[i] = {v, v, v, 255};
  }
  return out;
}

Mask read_mask_png(const std::filesystem::path& path) {
  DecodedPng png = read_png_any(path);
  if (png.kind != DecodedPng::Kind::Gray8) throw Error(ErrorCode::SchemaError, path.string() + " is not an 8-bit gray mask");
  Mask mask(png.gray.width(), png.gray.height(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) mask.data()[i] = png.gray.data()[i] > 127 ? 1 : 0;
  return mask;
}

Grid<std::uint16_t> face_map_to_gray16(const Grid<std::int32_t>& face) {
  Grid<std::uint16_t> out(face.width(), face.height(), 0);
  for (std::size_t i = 0; i < face.size(); ++i) {
    const long long v = static_cast<long long>(face.data()[i]) + 1;
    out.data()[i] = static_cast<std::uint16_t>(std::clamp<long long>(v, 0, 65535));
  }
  return out;
}

}  // namespace topoflow::io
