// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <png.h>

#include <csetjmp>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

// jpeglib.h expects size_t and FILE to be declared first.
#include <jpeglib.h>

#include "aqilung/error.hpp"

namespace aqilung::vision {

/// Interleaved 8-bit RGB, row-major.
struct RawImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  RawImage() = default;
  RawImage(std::size_t h, std::size_t w, std::vector<std::uint8_t> px) : height(h), width(w), pixels(std::move(px)) {
    if (h == 0 || w == 0) throw DimensionError("image dimensions must be positive");
    if (pixels.size() != h * w * 3) {
      throw DimensionError("image buffer holds " + std::to_string(pixels.size()) + " bytes, expected " +
                           std::to_string(h * w * 3));
    }
  }

  static RawImage filled(std::size_t h, std::size_t w, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::vector<std::uint8_t> px(h * w * 3);
    for (std::size_t i = 0; i < h * w; ++i) {
      px[3 * i] = r;
      px[3 * i + 1] = g;
      px[3 * i + 2] = b;
    }
    return {h, w, std::move(px)};
  }

  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const { return pixels[(y * width + x) * 3 + c]; }
  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * 3 + c]; }

  friend bool operator==(const RawImage&, const RawImage&) = default;
};

enum class ImageFormat { kUnknown, kPng, kJpeg };

inline ImageFormat sniff_format(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) return ImageFormat::kPng;
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return ImageFormat::kJpeg;
  return ImageFormat::kUnknown;
}

namespace detail {

inline RawImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DecodeError("png", image.message);
  }
  image.format = PNG_FORMAT_RGB;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw DecodeError("png", "empty image");
  }
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
  // Alpha is composited onto black.
  const png_color background{0, 0, 0};
  if (!png_image_finish_read(&image, &background, px.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError("png", msg);
  }
  return {image.height, image.width, std::move(px)};
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

extern "C" inline void aqilung_jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

extern "C" inline void aqilung_jpeg_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) ++cinfo->err->num_warnings;
}

// No objects with destructors live across setjmp in this function.
inline bool decode_jpeg_raw(const std::uint8_t* data, std::size_t size, std::uint8_t** out, std::size_t* height,
                            std::size_t* width, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  std::uint8_t* volatile buffer = nullptr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = aqilung_jpeg_error_exit;
  jerr.base.emit_message = aqilung_jpeg_emit_message;
  if (setjmp(jerr.jump)) {
    std::memcpy(message, jerr.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    std::free(buffer);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t h = cinfo.output_height, w = cinfo.output_width;
  const std::size_t stride = w * 3;
  buffer = static_cast<std::uint8_t*>(std::malloc(h * stride));
  if (buffer == nullptr) {
    std::snprintf(message, JMSG_LENGTH_MAX, "out of memory");
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = buffer + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  // Corrupt or truncated data only raises warnings in libjpeg; treat them as errors.
  if (jerr.base.num_warnings > 0) {
    (*cinfo.err->format_message)(reinterpret_cast<j_common_ptr>(&cinfo), message);
    jpeg_destroy_decompress(&cinfo);
    std::free(buffer);
    return false;
  }
  jpeg_destroy_decompress(&cinfo);
  *out = buffer;
  *height = h;
  *width = w;
  return true;
}

inline RawImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  std::uint8_t* buffer = nullptr;
  std::size_t h = 0, w = 0;
  char message[JMSG_LENGTH_MAX] = {0};
  if (!decode_jpeg_raw(bytes.data(), bytes.size(), &buffer, &h, &w, message)) {
    throw DecodeError("jpeg", message);
  }
  std::vector<std::uint8_t> px(buffer, buffer + h * w * 3);
  std::free(buffer);
  return {h, w, std::move(px)};
}

}  // namespace detail

/// Decodes PNG or JPEG bytes to RGB. Grayscale is replicated to three
/// channels; PNG alpha is composited onto black.
inline RawImage decode_image(std::span<const std::uint8_t> bytes) {
  switch (sniff_format(bytes)) {
    case ImageFormat::kPng:
      return detail::decode_png(bytes);
    case ImageFormat::kJpeg:
      return detail::decode_jpeg(bytes);
    case ImageFormat::kUnknown:
      break;
  }
  throw DecodeError("unknown", "unsupported image format (expected PNG or JPEG)");
}

inline std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path.string(), "read failed for " + path.string());
  return bytes;
}

inline RawImage read_image(const std::filesystem::path& path) { return decode_image(read_binary_file(path)); }

inline std::vector<std::uint8_t> encode_png(const RawImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.pixels.data(), 0, nullptr)) {
    throw DecodeError("png", std::string("encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.pixels.data(), 0, nullptr)) {
    throw DecodeError("png", std::string("encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

/// Grayscale PNG of a single-channel buffer.
inline std::vector<std::uint8_t> encode_png_gray(std::size_t h, std::size_t w, std::span<const std::uint8_t> gray) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  png_image_write_to_memory(&image, nullptr, &size, 0, gray.data(), 0, nullptr);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, gray.data(), 0, nullptr)) {
    throw DecodeError("png", std::string("encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

namespace detail {

inline bool encode_jpeg_raw(const RawImage* img, int quality, unsigned char** out, unsigned long* size,
                            char* message) {
  jpeg_compress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = aqilung_jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    std::memcpy(message, jerr.message, JMSG_LENGTH_MAX);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, out, size);
  cinfo.image_width = static_cast<JDIMENSION>(img->width);
  cinfo.image_height = static_cast<JDIMENSION>(img->height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = img->width * 3;
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<std::uint8_t*>(img->pixels.data() + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_jpeg(const RawImage& img, int quality = 90) {
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  char message[JMSG_LENGTH_MAX] = {0};
  if (!detail::encode_jpeg_raw(&img, quality, &buffer, &size, message)) {
    std::free(buffer);
    throw DecodeError("jpeg", std::string("encode: ") + message);
  }
  std::vector<std::uint8_t> out(buffer, buffer + size);
  std::free(buffer);
  return out;
}

}  // namespace aqilung::vision
