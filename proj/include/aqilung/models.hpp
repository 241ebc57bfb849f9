// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "aqilung/data/normalize.hpp"
#include "aqilung/data/patient.hpp"
#include "aqilung/error.hpp"
#include "aqilung/nn/mlp.hpp"
#include "aqilung/severity/knn.hpp"
#include "aqilung/severity/svc.hpp"
#include "aqilung/tensor.hpp"
#include "aqilung/vision/extractor.hpp"
#include "aqilung/vision/metadata.hpp"
#include "aqilung/vision/onnx.hpp"

namespace aqilung {

/// Enough to rebuild a feature extractor. `checksum` is the extractor's
/// parameter checksum at training time.
struct ExtractorSpec {
  std::string kind = "synthetic";  // "synthetic" or "onnx"
  std::uint64_t seed = 0;
  std::size_t output_dim = 512;
  std::size_t grid = 4;
  std::string onnx_path;
  std::string checksum;

  friend bool operator==(const ExtractorSpec&, const ExtractorSpec&) = default;
};

/// Builds the extractor and, when `spec.checksum` is set, verifies that its
/// parameters match.
inline std::unique_ptr<vision::FeatureExtractor> make_extractor(const ExtractorSpec& spec) {
  std::unique_ptr<vision::FeatureExtractor> out;
  if (spec.kind == "synthetic") {
    out = std::make_unique<vision::SyntheticExtractor>(spec.seed, spec.output_dim, spec.grid);
  } else if (spec.kind == "onnx") {
    if (spec.onnx_path.empty()) throw ValidationError("onnx extractor needs a model path", "extractor.path");
    out = std::make_unique<vision::OnnxExtractor>(std::filesystem::path(spec.onnx_path));
  } else {
    throw ValidationError("unknown extractor kind '" + spec.kind + "'", "extractor.kind");
  }
  if (!spec.checksum.empty() && out->parameter_checksum() != spec.checksum) {
    throw ChecksumError("extractor parameters differ from the ones the model was trained with");
  }
  if (out->output_dim() != spec.output_dim && spec.kind == "onnx" && !spec.checksum.empty()) {
    throw SchemaError("onnx backbone output width " + std::to_string(out->output_dim()) + " differs from " +
                      std::to_string(spec.output_dim));
  }
  return out;
}

/// Fills output_dim and checksum from a live extractor.
inline ExtractorSpec describe_extractor(ExtractorSpec spec, const vision::FeatureExtractor& ex) {
  spec.output_dim = ex.output_dim();
  spec.checksum = ex.parameter_checksum();
  return spec;
}

/// Image regressor: fused features are z-scored, run through the MLP, and
/// the 7 outputs mapped back to source units.
struct AqiModel {
  ExtractorSpec extractor;
  std::size_t meta_dim = vision::kMetadataDim;
  data::Standardizer feature_scaler;
  data::Standardizer target_scaler;
  nn::MlpRegressor mlp;

  std::size_t input_dim() const { return extractor.output_dim + meta_dim; }

  /// `fused` is [n x input_dim]; returns [n x 7].
  Tensor predict(const Tensor& fused) const { return target_scaler.inverse(mlp.predict(feature_scaler.transform(fused))); }
};

enum class SeverityKind { kKnn, kSvc };

inline std::string_view severity_kind_name(SeverityKind k) { return k == SeverityKind::kKnn ? "knn" : "svc"; }

/// Patient classifier with the feature schema and min-max spec it was
/// trained with.
struct SeverityModel {
  std::vector<data::PatientFeature> schema;
  data::NormalizationSpec normalization;
  std::variant<severity::KnnModel, severity::SvcModel> classifier;

  SeverityKind kind() const { return classifier.index() == 0 ? SeverityKind::kKnn : SeverityKind::kSvc; }

  /// Raw (unscaled) feature values in schema order.
  int predict(std::span<const double> raw) const {
    if (raw.size() != schema.size()) {
      throw DimensionError("expected " + std::to_string(schema.size()) + " features, got " + std::to_string(raw.size()));
    }
    const auto x = normalization.apply(raw);
    return std::visit([&](const auto& m) { return severity::predict(m, x); }, classifier);
  }
};

}  // namespace aqilung
