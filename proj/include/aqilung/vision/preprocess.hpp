// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "aqilung/error.hpp"
#include "aqilung/tensor.hpp"
#include "aqilung/vision/image.hpp"

namespace aqilung::vision {

inline constexpr std::size_t kInputSize = 224;

/// ImageNet training means, RGB order.
inline constexpr std::array<double, 3> kChannelMeans{123.68, 116.779, 103.939};

/// Corner-aligned bilinear resize to [out_h x out_w x 3] floats.
///
/// Output pixel (i, j) samples the source at y = i (H - 1) / (out_h - 1),
/// x = j (W - 1) / (out_w - 1) (0 when the output extent is 1), blending
/// the four surrounding pixels with weights (1 - fy, fy) x (1 - fx, fx).
/// At equal sizes the sampling positions are exact integers and the resize
/// is the identity.
inline Tensor resize_bilinear(const RawImage& img, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw DimensionError("resize target must be positive");
  Tensor out({out_h, out_w, 3});
  auto dst = out.data();
  const double sy = out_h > 1 ? static_cast<double>(img.height - 1) / static_cast<double>(out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(img.width - 1) / static_cast<double>(out_w - 1) : 0.0;
  for (std::size_t i = 0; i < out_h; ++i) {
    const double y = static_cast<double>(i) * sy;
    const auto y0 = std::min(static_cast<std::size_t>(std::floor(y)), img.height - 1);
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t j = 0; j < out_w; ++j) {
      const double x = static_cast<double>(j) * sx;
      const auto x0 = std::min(static_cast<std::size_t>(std::floor(x)), img.width - 1);
      const std::size_t x1 = std::min(x0 + 1, img.width - 1);
      const double fx = x - static_cast<double>(x0);
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = img.at(y0, x0, c) * (1.0 - fx) + img.at(y0, x1, c) * fx;
        const double bottom = img.at(y1, x0, c) * (1.0 - fx) + img.at(y1, x1, c) * fx;
        dst[(i * out_w + j) * 3 + c] = top * (1.0 - fy) + bottom * fy;
      }
    }
  }
  return out;
}

/// Resize to 224 x 224 and subtract the per-channel means. Channels stay RGB.
inline Tensor preprocess(const RawImage& img) {
  Tensor out = resize_bilinear(img, kInputSize, kInputSize);
  auto v = out.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= kChannelMeans[i % 3];
  return out;
}

/// Mean over the two spatial axes of an [h x w x c] map.
inline Tensor global_average_pool(const Tensor& maps) {
  if (maps.rank() != 3) throw DimensionError("global_average_pool expects [h x w x c], got " + shape_str(maps.shape()));
  const std::size_t hw = maps.shape()[0] * maps.shape()[1], c = maps.shape()[2];
  std::vector<double> sum(c, 0.0);
  const auto v = maps.data();
  for (std::size_t p = 0; p < hw; ++p) {
    for (std::size_t k = 0; k < c; ++k) sum[k] += v[p * c + k];
  }
  for (double& s : sum) s /= static_cast<double>(hw);
  return Tensor::vector(std::move(sum));
}

}  // namespace aqilung::vision
