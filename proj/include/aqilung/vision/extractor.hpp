// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "aqilung/checksum.hpp"
#include "aqilung/error.hpp"
#include "aqilung/rng.hpp"
#include "aqilung/tensor.hpp"
#include "aqilung/vision/preprocess.hpp"

namespace aqilung::vision {

/// Frozen image-to-vector map. Implementations are immutable after
/// construction and safe to call concurrently.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string name() const = 0;
  virtual std::size_t output_dim() const = 0;
  /// `image` is a preprocessed [h x w x 3] tensor.
  virtual Tensor extract(const Tensor& image) const = 0;
  /// SHA-256 over every parameter; identical before and after extraction.
  virtual std::string parameter_checksum() const = 0;
};

/// Runs the extractor on a preprocessed image and checks the result.
inline Tensor extract_features(const Tensor& image, const FeatureExtractor& extractor) {
  if (image.rank() != 3 || image.shape()[2] != 3) {
    throw DimensionError("extractor input must be [h x w x 3], got " + shape_str(image.shape()));
  }
  Tensor f = extractor.extract(image);
  if (f.size() != extractor.output_dim()) {
    throw DimensionError(extractor.name() + " produced " + std::to_string(f.size()) + " features, declared " +
                         std::to_string(extractor.output_dim()));
  }
  if (!f.all_finite()) throw NumericError(extractor.name(), "extractor produced non-finite features");
  return f;
}

/// Deterministic stand-in backbone built from image statistics.
///
/// The image is cut into a grid x grid lattice of cells (the last row and
/// column absorb the remainder). Each cell contributes, per channel, its
/// mean / 128 and its population variance / 128^2, giving 6 grid^2 base
/// statistics. Feature k is scale[k] * stat[index[k]] where index cycles
/// through a seeded permutation of the statistics and scale[k] is drawn
/// from U(0.5, 1.5).
class SyntheticExtractor final : public FeatureExtractor {
 public:
  explicit SyntheticExtractor(std::uint64_t seed = 0, std::size_t output_dim = 512, std::size_t grid = 4)
      : seed_(seed), output_dim_(output_dim), grid_(grid) {
    if (output_dim == 0) throw DomainError("synthetic extractor output_dim must be positive");
    if (grid == 0) throw DomainError("synthetic extractor grid must be positive");
    SeededRng rng(seed);
    std::vector<std::size_t> perm(stat_count());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    index_.resize(output_dim);
    scale_.resize(output_dim);
    for (std::size_t k = 0; k < output_dim; ++k) {
      index_[k] = perm[k % perm.size()];
      scale_[k] = rng.uniform(0.5, 1.5);
    }
  }

  std::string name() const override { return "synthetic"; }
  std::size_t output_dim() const override { return output_dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t grid() const noexcept { return grid_; }
  std::size_t stat_count() const noexcept { return grid_ * grid_ * 6; }
  const std::vector<std::size_t>& indices() const noexcept { return index_; }
  const std::vector<double>& scales() const noexcept { return scale_; }

  /// Base statistics in order (cell row, cell col, channel, {mean, var}).
  std::vector<double> statistics(const Tensor& image) const {
    const std::size_t h = image.shape()[0], w = image.shape()[1];
    if (h < grid_ || w < grid_) throw DimensionError("image smaller than the synthetic extractor grid");
    const auto v = image.data();
    std::vector<double> stats;
    stats.reserve(stat_count());
    const std::size_t ch = h / grid_, cw = w / grid_;
    for (std::size_t gy = 0; gy < grid_; ++gy) {
      const std::size_t y0 = gy * ch, y1 = gy + 1 == grid_ ? h : y0 + ch;
      for (std::size_t gx = 0; gx < grid_; ++gx) {
        const std::size_t x0 = gx * cw, x1 = gx + 1 == grid_ ? w : x0 + cw;
        const double count = static_cast<double>((y1 - y0) * (x1 - x0));
        for (std::size_t c = 0; c < 3; ++c) {
          double sum = 0.0;
          for (std::size_t y = y0; y < y1; ++y) {
            for (std::size_t x = x0; x < x1; ++x) sum += v[(y * w + x) * 3 + c];
          }
          const double mean = sum / count;
          double sq = 0.0;
          for (std::size_t y = y0; y < y1; ++y) {
            for (std::size_t x = x0; x < x1; ++x) {
              const double d = v[(y * w + x) * 3 + c] - mean;
              sq += d * d;
            }
          }
          stats.push_back(mean / 128.0);
          stats.push_back(sq / count / (128.0 * 128.0));
        }
      }
    }
    return stats;
  }

  Tensor extract(const Tensor& image) const override {
    const auto stats = statistics(image);
    std::vector<double> out(output_dim_);
    for (std::size_t k = 0; k < output_dim_; ++k) out[k] = scale_[k] * stats[index_[k]];
    return Tensor::vector(std::move(out));
  }

  std::string parameter_checksum() const override {
    std::string blob;
    for (std::size_t i : index_) blob.append(reinterpret_cast<const char*>(&i), sizeof i);
    for (double s : scale_) blob.append(reinterpret_cast<const char*>(&s), sizeof s);
    return sha256_hex(blob);
  }

 private:
  std::uint64_t seed_;
  std::size_t output_dim_;
  std::size_t grid_;
  std::vector<std::size_t> index_;
  std::vector<double> scale_;
};

/// Concatenation, features first.
inline Tensor fuse(const Tensor& features, const Tensor& meta) {
  if (!features.all_finite() || !meta.all_finite()) throw DomainError("fuse: inputs must be finite");
  std::vector<double> out(features.data().begin(), features.data().end());
  out.insert(out.end(), meta.data().begin(), meta.data().end());
  if (out.empty()) throw DimensionError("fuse: both inputs are empty");
  return Tensor::vector(std::move(out));
}

}  // namespace aqilung::vision
