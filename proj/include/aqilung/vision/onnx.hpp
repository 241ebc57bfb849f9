// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <google/protobuf/io/coded_stream.h>
#include <google/protobuf/wire_format_lite.h>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aqilung/checksum.hpp"
#include "aqilung/error.hpp"
#include "aqilung/vision/extractor.hpp"
#include "aqilung/vision/image.hpp"

namespace aqilung::vision {

/// Float tensor as stored in an ONNX initializer.
struct OnnxTensor {
  std::string name;
  std::vector<std::int64_t> dims;
  std::vector<float> data;

  std::size_t numel() const {
    std::size_t n = 1;
    for (auto d : dims) n *= static_cast<std::size_t>(d);
    return n;
  }
};

struct OnnxAttribute {
  std::string name;
  std::int64_t i = 0;
  float f = 0.0f;
  std::string s;
  std::vector<std::int64_t> ints;
  std::vector<float> floats;
};

struct OnnxNode {
  std::string name;
  std::string op_type;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<OnnxAttribute> attributes;

  const OnnxAttribute* attr(std::string_view key) const {
    for (const auto& a : attributes) {
      if (a.name == key) return &a;
    }
    return nullptr;
  }
  std::vector<std::int64_t> ints(std::string_view key, std::vector<std::int64_t> fallback) const {
    const auto* a = attr(key);
    return a ? a->ints : fallback;
  }
  std::int64_t int_attr(std::string_view key, std::int64_t fallback) const {
    const auto* a = attr(key);
    return a ? a->i : fallback;
  }
};

struct OnnxValueInfo {
  std::string name;
  /// -1 for symbolic or missing extents.
  std::vector<std::int64_t> dims;
};

struct OnnxGraph {
  std::vector<OnnxNode> nodes;
  std::map<std::string, OnnxTensor> initializers;
  std::vector<OnnxValueInfo> inputs;
  std::vector<OnnxValueInfo> outputs;
};

namespace onnx_wire {

using google::protobuf::internal::WireFormatLite;
using google::protobuf::io::CodedInputStream;

[[noreturn]] inline void fail(const std::string& what) { throw DecodeError("onnx", what); }

/// Calls f(field_number, wire_type, stream) for every field of a message.
/// Unhandled fields must be skipped by returning false.
template <typename F>
void for_each_field(std::string_view bytes, F&& f) {
  CodedInputStream in(reinterpret_cast<const std::uint8_t*>(bytes.data()), static_cast<int>(bytes.size()));
  while (true) {
    const std::uint32_t tag = in.ReadTag();
    if (tag == 0) {
      if (in.CurrentPosition() != static_cast<int>(bytes.size())) fail("malformed protobuf (bad tag)");
      break;
    }
    const int field = static_cast<int>(WireFormatLite::GetTagFieldNumber(tag));
    const auto wire = WireFormatLite::GetTagWireType(tag);
    if (!f(field, wire, in)) {
      if (!WireFormatLite::SkipField(&in, tag)) fail("malformed protobuf (truncated field " + std::to_string(field) + ")");
    }
  }
}

inline std::string read_bytes(CodedInputStream& in) {
  std::uint32_t len = 0;
  std::string s;
  if (!in.ReadVarint32(&len) || !in.ReadString(&s, static_cast<int>(len))) fail("truncated length-delimited field");
  return s;
}

inline std::uint64_t read_varint(CodedInputStream& in) {
  std::uint64_t v = 0;
  if (!in.ReadVarint64(&v)) fail("truncated varint");
  return v;
}

inline float read_float(CodedInputStream& in) {
  std::uint32_t bits = 0;
  if (!in.ReadLittleEndian32(&bits)) fail("truncated fixed32");
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

/// Repeated int64: packed or one varint per tag.
inline void read_ints(CodedInputStream& in, WireFormatLite::WireType wire, std::vector<std::int64_t>& out) {
  if (wire == WireFormatLite::WIRETYPE_LENGTH_DELIMITED) {
    const std::string packed = read_bytes(in);
    CodedInputStream sub(reinterpret_cast<const std::uint8_t*>(packed.data()), static_cast<int>(packed.size()));
    while (sub.CurrentPosition() < static_cast<int>(packed.size())) {
      out.push_back(static_cast<std::int64_t>(read_varint(sub)));
    }
  } else {
    out.push_back(static_cast<std::int64_t>(read_varint(in)));
  }
}

inline void read_floats(CodedInputStream& in, WireFormatLite::WireType wire, std::vector<float>& out) {
  if (wire == WireFormatLite::WIRETYPE_LENGTH_DELIMITED) {
    const std::string packed = read_bytes(in);
    if (packed.size() % 4 != 0) fail("packed float field has odd length");
    const std::size_t n = packed.size() / 4, base = out.size();
    out.resize(base + n);
    std::memcpy(out.data() + base, packed.data(), packed.size());
  } else {
    out.push_back(read_float(in));
  }
}

inline constexpr std::int32_t kFloat = 1;

inline OnnxTensor parse_tensor(std::string_view bytes) {
  OnnxTensor t;
  std::int64_t data_type = 0;
  std::string raw;
  bool has_raw = false;
  for_each_field(bytes, [&](int field, auto wire, CodedInputStream& in) {
    switch (field) {
      case 1: read_ints(in, wire, t.dims); return true;
      case 2: data_type = static_cast<std::int64_t>(read_varint(in)); return true;
      case 4: read_floats(in, wire, t.data); return true;
      case 8: t.name = read_bytes(in); return true;
      case 9: raw = read_bytes(in); has_raw = true; return true;
      default: return false;
    }
  });
  if (data_type != kFloat) fail("initializer '" + t.name + "' is not float32 (data_type " + std::to_string(data_type) + ")");
  if (has_raw) {
    if (raw.size() % 4 != 0) fail("initializer '" + t.name + "' raw_data length not a multiple of 4");
    t.data.resize(raw.size() / 4);
    std::memcpy(t.data.data(), raw.data(), raw.size());
  }
  for (auto d : t.dims) {
    if (d < 0) fail("initializer '" + t.name + "' has a negative extent");
  }
  if (t.data.size() != t.numel()) {
    fail("initializer '" + t.name + "' holds " + std::to_string(t.data.size()) + " values for " +
         std::to_string(t.numel()) + " elements");
  }
  return t;
}

inline OnnxAttribute parse_attribute(std::string_view bytes) {
  OnnxAttribute a;
  for_each_field(bytes, [&](int field, auto wire, CodedInputStream& in) {
    switch (field) {
      case 1: a.name = read_bytes(in); return true;
      case 2: a.f = read_float(in); return true;
      case 3: a.i = static_cast<std::int64_t>(read_varint(in)); return true;
      case 4: a.s = read_bytes(in); return true;
      case 7: read_floats(in, wire, a.floats); return true;
      case 8: read_ints(in, wire, a.ints); return true;
      default: return false;
    }
  });
  return a;
}

inline OnnxNode parse_node(std::string_view bytes) {
  OnnxNode n;
  for_each_field(bytes, [&](int field, auto, CodedInputStream& in) {
    switch (field) {
      case 1: n.inputs.push_back(read_bytes(in)); return true;
      case 2: n.outputs.push_back(read_bytes(in)); return true;
      case 3: n.name = read_bytes(in); return true;
      case 4: n.op_type = read_bytes(in); return true;
      case 5: n.attributes.push_back(parse_attribute(read_bytes(in))); return true;
      default: return false;
    }
  });
  return n;
}

// ValueInfoProto.type -> TypeProto.tensor_type -> shape -> dim -> dim_value.
inline OnnxValueInfo parse_value_info(std::string_view bytes) {
  OnnxValueInfo v;
  for_each_field(bytes, [&](int field, auto, CodedInputStream& in) {
    if (field == 1) {
      v.name = read_bytes(in);
      return true;
    }
    if (field != 2) return false;
    for_each_field(read_bytes(in), [&](int f2, auto, CodedInputStream& in2) {
      if (f2 != 1) return false;
      for_each_field(read_bytes(in2), [&](int f3, auto, CodedInputStream& in3) {
        if (f3 != 2) return false;
        for_each_field(read_bytes(in3), [&](int f4, auto, CodedInputStream& in4) {
          if (f4 != 1) return false;
          std::int64_t extent = -1;
          for_each_field(read_bytes(in4), [&](int f5, auto, CodedInputStream& in5) {
            if (f5 != 1) return false;
            extent = static_cast<std::int64_t>(read_varint(in5));
            return true;
          });
          v.dims.push_back(extent);
          return true;
        });
        return true;
      });
      return true;
    });
    return true;
  });
  return v;
}

inline OnnxGraph parse_graph(std::string_view bytes) {
  OnnxGraph g;
  for_each_field(bytes, [&](int field, auto, CodedInputStream& in) {
    switch (field) {
      case 1: g.nodes.push_back(parse_node(read_bytes(in))); return true;
      case 5: {
        auto t = parse_tensor(read_bytes(in));
        g.initializers[t.name] = std::move(t);
        return true;
      }
      case 11: g.inputs.push_back(parse_value_info(read_bytes(in))); return true;
      case 12: g.outputs.push_back(parse_value_info(read_bytes(in))); return true;
      default: return false;
    }
  });
  return g;
}

}  // namespace onnx_wire

/// Parses a serialized ModelProto and returns its graph.
inline OnnxGraph parse_onnx_model(std::string_view bytes) {
  std::optional<OnnxGraph> graph;
  onnx_wire::for_each_field(bytes, [&](int field, auto, auto& in) {
    if (field != 7) return false;
    graph = onnx_wire::parse_graph(onnx_wire::read_bytes(in));
    return true;
  });
  if (!graph) onnx_wire::fail("model has no graph");
  return std::move(*graph);
}

namespace detail {

/// Activation with a tracked channel axis so the final layout (NHWC or
/// NCHW) is known without guessing from extents.
struct Activation {
  std::vector<std::int64_t> shape;
  std::vector<float> data;
  std::size_t channel_axis = 0;
};

inline std::size_t numel(const std::vector<std::int64_t>& s) {
  std::size_t n = 1;
  for (auto d : s) n *= static_cast<std::size_t>(d);
  return n;
}

inline Activation transpose(const Activation& x, const std::vector<std::int64_t>& perm) {
  const std::size_t r = x.shape.size();
  if (perm.size() != r) onnx_wire::fail("Transpose perm rank mismatch");
  Activation y;
  y.shape.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    y.shape[i] = x.shape[static_cast<std::size_t>(perm[i])];
    if (static_cast<std::size_t>(perm[i]) == x.channel_axis) y.channel_axis = i;
  }
  std::vector<std::size_t> in_stride(r, 1), out_stride(r, 1);
  for (std::size_t i = r - 1; i > 0; --i) {
    in_stride[i - 1] = in_stride[i] * static_cast<std::size_t>(x.shape[i]);
    out_stride[i - 1] = out_stride[i] * static_cast<std::size_t>(y.shape[i]);
  }
  y.data.resize(x.data.size());
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t o = 0; o < y.data.size(); ++o) {
    std::size_t rem = o, src = 0;
    for (std::size_t i = 0; i < r; ++i) {
      const std::size_t coord = rem / out_stride[i];
      rem %= out_stride[i];
      src += coord * in_stride[static_cast<std::size_t>(perm[i])];
    }
    y.data[o] = x.data[src];
  }
  return y;
}

struct Window {
  std::int64_t kh, kw, sh, sw, dh, dw, pt, pl, pb, pr;
};

inline Window window_of(const OnnxNode& node, std::int64_t kh, std::int64_t kw) {
  const auto auto_pad = node.attr("auto_pad");
  if (auto_pad && !auto_pad->s.empty() && auto_pad->s != "NOTSET" && auto_pad->s != "VALID") {
    onnx_wire::fail(node.op_type + " auto_pad " + auto_pad->s + " is not supported");
  }
  const auto strides = node.ints("strides", {1, 1});
  const auto dil = node.ints("dilations", {1, 1});
  const auto pads = node.ints("pads", {0, 0, 0, 0});
  if (strides.size() != 2 || dil.size() != 2 || pads.size() != 4) onnx_wire::fail(node.op_type + " must be 2-D");
  return {kh, kw, strides[0], strides[1], dil[0], dil[1], pads[0], pads[1], pads[2], pads[3]};
}

inline std::int64_t out_extent(std::int64_t in, std::int64_t k, std::int64_t s, std::int64_t d, std::int64_t p0,
                               std::int64_t p1) {
  const std::int64_t eff = d * (k - 1) + 1;
  const std::int64_t o = (in + p0 + p1 - eff) / s + 1;
  if (o <= 0) onnx_wire::fail("window larger than input");
  return o;
}

/// NCHW convolution, batch 1, group 1, as tiled im2col + blocked GEMM.
inline Activation conv2d(const Activation& x, const OnnxTensor& w, const OnnxTensor* b, const OnnxNode& node) {
  if (x.shape.size() != 4 || x.shape[0] != 1) onnx_wire::fail("Conv expects a [1, C, H, W] input");
  if (node.int_attr("group", 1) != 1) onnx_wire::fail("grouped Conv is not supported");
  if (w.dims.size() != 4 || w.dims[1] != x.shape[1]) onnx_wire::fail("Conv weight shape does not match input channels");
  const std::int64_t c = x.shape[1], h = x.shape[2], wd = x.shape[3];
  const std::int64_t m = w.dims[0];
  const Window win = window_of(node, w.dims[2], w.dims[3]);
  const std::int64_t oh = out_extent(h, win.kh, win.sh, win.dh, win.pt, win.pb);
  const std::int64_t ow = out_extent(wd, win.kw, win.sw, win.dw, win.pl, win.pr);
  const auto k = static_cast<std::size_t>(c * win.kh * win.kw);
  const auto npix = static_cast<std::size_t>(oh * ow);
  if (b && b->data.size() != static_cast<std::size_t>(m)) onnx_wire::fail("Conv bias length mismatch");

  Activation y;
  y.shape = {1, m, oh, ow};
  y.channel_axis = 1;
  y.data.assign(static_cast<std::size_t>(m) * npix, 0.0f);

  constexpr std::size_t kTile = 128;
  constexpr std::size_t kBlock = 8;
  std::vector<float> cols(k * kTile);
  std::vector<float> acc(kBlock * kTile);
  for (std::size_t p0 = 0; p0 < npix; p0 += kTile) {
    const std::size_t tile = std::min(kTile, npix - p0);
    // cols[kk][p] = input value feeding output pixel p0 + p through tap kk.
    for (std::int64_t ci = 0; ci < c; ++ci) {
      for (std::int64_t ky = 0; ky < win.kh; ++ky) {
        for (std::int64_t kx = 0; kx < win.kw; ++kx) {
          float* row = cols.data() + static_cast<std::size_t>((ci * win.kh + ky) * win.kw + kx) * kTile;
          for (std::size_t p = 0; p < tile; ++p) {
            const auto pix = static_cast<std::int64_t>(p0 + p);
            const std::int64_t iy = (pix / ow) * win.sh - win.pt + ky * win.dh;
            const std::int64_t ix = (pix % ow) * win.sw - win.pl + kx * win.dw;
            row[p] = (iy < 0 || iy >= h || ix < 0 || ix >= wd)
                         ? 0.0f
                         : x.data[static_cast<std::size_t>((ci * h + iy) * wd + ix)];
          }
        }
      }
    }
    for (std::size_t m0 = 0; m0 < static_cast<std::size_t>(m); m0 += kBlock) {
      const std::size_t mb = std::min(kBlock, static_cast<std::size_t>(m) - m0);
      std::fill(acc.begin(), acc.end(), 0.0f);
      for (std::size_t kk = 0; kk < k; ++kk) {
        const float* col = cols.data() + kk * kTile;
        for (std::size_t j = 0; j < mb; ++j) {
          const float wv = w.data[(m0 + j) * k + kk];
          float* a = acc.data() + j * kTile;
          for (std::size_t p = 0; p < tile; ++p) a[p] += wv * col[p];
        }
      }
      for (std::size_t j = 0; j < mb; ++j) {
        const float bias = b ? b->data[m0 + j] : 0.0f;
        float* dst = y.data.data() + (m0 + j) * npix + p0;
        for (std::size_t p = 0; p < tile; ++p) dst[p] = acc[j * kTile + p] + bias;
      }
    }
  }
  return y;
}

inline Activation maxpool2d(const Activation& x, const OnnxNode& node) {
  if (x.shape.size() != 4 || x.shape[0] != 1) onnx_wire::fail("MaxPool expects a [1, C, H, W] input");
  const auto kernel = node.ints("kernel_shape", {});
  if (kernel.size() != 2) onnx_wire::fail("MaxPool needs a 2-D kernel_shape");
  if (node.int_attr("ceil_mode", 0) != 0) onnx_wire::fail("MaxPool ceil_mode is not supported");
  const Window win = window_of(node, kernel[0], kernel[1]);
  const std::int64_t c = x.shape[1], h = x.shape[2], w = x.shape[3];
  const std::int64_t oh = out_extent(h, win.kh, win.sh, win.dh, win.pt, win.pb);
  const std::int64_t ow = out_extent(w, win.kw, win.sw, win.dw, win.pl, win.pr);
  Activation y;
  y.shape = {1, c, oh, ow};
  y.channel_axis = 1;
  y.data.resize(static_cast<std::size_t>(c * oh * ow));
  for (std::int64_t ci = 0; ci < c; ++ci) {
    for (std::int64_t oy = 0; oy < oh; ++oy) {
      for (std::int64_t ox = 0; ox < ow; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        for (std::int64_t ky = 0; ky < win.kh; ++ky) {
          for (std::int64_t kx = 0; kx < win.kw; ++kx) {
            const std::int64_t iy = oy * win.sh - win.pt + ky * win.dh;
            const std::int64_t ix = ox * win.sw - win.pl + kx * win.dw;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
            best = std::max(best, x.data[static_cast<std::size_t>((ci * h + iy) * w + ix)]);
          }
        }
        y.data[static_cast<std::size_t>((ci * oh + oy) * ow + ox)] = best;
      }
    }
  }
  return y;
}

/// Mean over every axis except batch and channel.
inline std::vector<double> pool_channels(const Activation& x) {
  const std::size_t r = x.shape.size();
  const auto channels = static_cast<std::size_t>(x.shape[x.channel_axis]);
  std::size_t inner = 1;
  for (std::size_t i = x.channel_axis + 1; i < r; ++i) inner *= static_cast<std::size_t>(x.shape[i]);
  std::vector<double> sum(channels, 0.0);
  for (std::size_t i = 0; i < x.data.size(); ++i) sum[(i / inner) % channels] += x.data[i];
  const double count = static_cast<double>(x.data.size()) / static_cast<double>(channels);
  for (double& s : sum) s /= count;
  return sum;
}

}  // namespace detail

/// Frozen backbone loaded from an ONNX file, followed by global average
/// pooling. Supported operators: Conv, Relu, MaxPool, Transpose,
/// GlobalAveragePool, Identity. The graph input is [1, 224, 224, 3] (NHWC,
/// RGB, mean-subtracted); the output layout is tracked through the graph.
class OnnxExtractor final : public FeatureExtractor {
 public:
  explicit OnnxExtractor(const std::filesystem::path& path) : OnnxExtractor(read_binary_file(path), path.string()) {}

  OnnxExtractor(const std::vector<std::uint8_t>& bytes, std::string source)
      : source_(std::move(source)),
        graph_(parse_onnx_model(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()))) {
    validate();
  }

  std::string name() const override { return "onnx:" + source_; }
  std::size_t output_dim() const override { return output_dim_; }
  const OnnxGraph& graph() const noexcept { return graph_; }
  const std::string& input_name() const noexcept { return input_name_; }
  const std::vector<std::int64_t>& input_shape() const noexcept { return input_shape_; }

  Tensor extract(const Tensor& image) const override {
    const auto& s = image.shape();
    if (s.size() != 3 || static_cast<std::int64_t>(s[0]) != input_shape_[1] ||
        static_cast<std::int64_t>(s[1]) != input_shape_[2] || static_cast<std::int64_t>(s[2]) != input_shape_[3]) {
      throw DimensionError("onnx backbone expects [" + std::to_string(input_shape_[1]) + " x " +
                           std::to_string(input_shape_[2]) + " x " + std::to_string(input_shape_[3]) + "], got " +
                           shape_str(s));
    }
    std::map<std::string, detail::Activation> values;
    detail::Activation in;
    in.shape = input_shape_;
    in.channel_axis = 3;
    in.data.assign(image.data().begin(), image.data().end());
    values[input_name_] = std::move(in);
    for (const auto& node : graph_.nodes) {
      const auto& x = values.at(node.inputs.at(0));
      detail::Activation y;
      if (node.op_type == "Conv") {
        const auto* b = node.inputs.size() > 2 && !node.inputs[2].empty() ? &graph_.initializers.at(node.inputs[2])
                                                                          : nullptr;
        y = detail::conv2d(x, graph_.initializers.at(node.inputs.at(1)), b, node);
      } else if (node.op_type == "Relu") {
        y = x;
        for (float& v : y.data) v = std::max(v, 0.0f);
      } else if (node.op_type == "MaxPool") {
        y = detail::maxpool2d(x, node);
      } else if (node.op_type == "Transpose") {
        y = detail::transpose(x, node.ints("perm", {}));
      } else if (node.op_type == "GlobalAveragePool") {
        const auto pooled = detail::pool_channels(x);
        y.shape = {1, static_cast<std::int64_t>(pooled.size()), 1, 1};
        y.channel_axis = 1;
        y.data.assign(pooled.begin(), pooled.end());
      } else {
        y = x;  // Identity
      }
      values[node.outputs.at(0)] = std::move(y);
    }
    const auto pooled = detail::pool_channels(values.at(output_name_));
    return Tensor::vector(pooled);
  }

  std::string parameter_checksum() const override {
    std::string blob;
    for (const auto& [name, t] : graph_.initializers) {
      blob += name;
      blob.push_back('\0');
      blob.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(float));
    }
    return sha256_hex(blob);
  }

 private:
  // Checks the operator set and wiring, and infers the channel count.
  void validate() {
    std::vector<const OnnxValueInfo*> real_inputs;
    for (const auto& v : graph_.inputs) {
      if (!graph_.initializers.contains(v.name)) real_inputs.push_back(&v);
    }
    if (real_inputs.size() != 1) onnx_wire::fail("backbone must have exactly one non-initializer input");
    if (graph_.outputs.size() != 1) onnx_wire::fail("backbone must have exactly one output");
    input_name_ = real_inputs[0]->name;
    input_shape_ = real_inputs[0]->dims;
    if (input_shape_.size() != 4 || input_shape_[3] != 3) {
      onnx_wire::fail("backbone input must be [1, H, W, 3]");
    }
    input_shape_[0] = 1;
    if (input_shape_[1] <= 0 || input_shape_[2] <= 0) {
      input_shape_[1] = static_cast<std::int64_t>(kInputSize);
      input_shape_[2] = static_cast<std::int64_t>(kInputSize);
    }
    output_name_ = graph_.outputs[0].name;

    std::map<std::string, std::int64_t> channels{{input_name_, 3}};
    for (const auto& node : graph_.nodes) {
      if (node.inputs.empty() || node.outputs.empty()) onnx_wire::fail(node.op_type + " node without input or output");
      const auto it = channels.find(node.inputs[0]);
      if (it == channels.end()) onnx_wire::fail("node input '" + node.inputs[0] + "' is not produced earlier");
      std::int64_t ch = it->second;
      if (node.op_type == "Conv") {
        if (node.inputs.size() < 2) onnx_wire::fail("Conv without weights");
        for (std::size_t i = 1; i < node.inputs.size(); ++i) {
          if (!node.inputs[i].empty() && !graph_.initializers.contains(node.inputs[i])) {
            onnx_wire::fail("Conv parameter '" + node.inputs[i] + "' is not an initializer");
          }
        }
        const auto& w = graph_.initializers.at(node.inputs[1]);
        if (w.dims.size() != 4 || w.dims[1] != ch) onnx_wire::fail("Conv weight shape does not match input channels");
        ch = w.dims[0];
      } else if (node.op_type != "Relu" && node.op_type != "MaxPool" && node.op_type != "Transpose" &&
                 node.op_type != "GlobalAveragePool" && node.op_type != "Identity") {
        onnx_wire::fail("unsupported operator " + node.op_type);
      }
      channels[node.outputs[0]] = ch;
    }
    const auto out = channels.find(output_name_);
    if (out == channels.end()) onnx_wire::fail("graph output '" + output_name_ + "' is never produced");
    output_dim_ = static_cast<std::size_t>(out->second);
  }

  std::string source_;
  OnnxGraph graph_;
  std::string input_name_;
  std::vector<std::int64_t> input_shape_;
  std::string output_name_;
  std::size_t output_dim_ = 0;
};

}  // namespace aqilung::vision
