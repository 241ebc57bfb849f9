// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <google/protobuf/io/coded_stream.h>
#include <google/protobuf/io/zero_copy_stream_impl_lite.h>
#include <google/protobuf/wire_format_lite.h>

#include <cstdint>
#include <string>
#include <vector>

#include "aqilung/rng.hpp"

namespace aqilung::testing {

/// Minimal ONNX ModelProto encoder for building backbone fixtures.
class OnnxWriter {
 public:
  struct Attr {
    std::string name;
    std::vector<std::int64_t> ints;
    bool is_list = true;
    std::int64_t i = 0;
    std::string s;
  };

  void input(const std::string& name, const std::vector<std::int64_t>& dims) { inputs_ += wrap(11, value_info(name, dims)); }
  void output(const std::string& name) { outputs_ += wrap(12, value_info(name, {})); }

  void initializer(const std::string& name, const std::vector<std::int64_t>& dims, const std::vector<float>& data,
                   bool packed_float_data = false) {
    std::string t;
    for (auto d : dims) varint_field(t, 1, static_cast<std::uint64_t>(d));
    varint_field(t, 2, 1);
    bytes_field(t, 8, name);
    if (packed_float_data) {
      bytes_field(t, 4, std::string(reinterpret_cast<const char*>(data.data()), data.size() * 4));
    } else {
      bytes_field(t, 9, std::string(reinterpret_cast<const char*>(data.data()), data.size() * 4));
    }
    initializers_ += wrap(5, t);
  }

  void node(const std::string& op, const std::vector<std::string>& in, const std::string& out,
            const std::vector<Attr>& attrs = {}) {
    std::string n;
    for (const auto& s : in) bytes_field(n, 1, s);
    bytes_field(n, 2, out);
    bytes_field(n, 3, out + "_node");
    bytes_field(n, 4, op);
    for (const auto& a : attrs) {
      std::string ab;
      bytes_field(ab, 1, a.name);
      if (!a.s.empty()) {
        bytes_field(ab, 4, a.s);
        varint_field(ab, 20, 3);
      } else if (a.is_list) {
        std::string packed;
        for (auto v : a.ints) put_varint(packed, static_cast<std::uint64_t>(v));
        bytes_field(ab, 8, packed);
        varint_field(ab, 20, 7);
      } else {
        varint_field(ab, 3, static_cast<std::uint64_t>(a.i));
        varint_field(ab, 20, 2);
      }
      n += wrap(5, ab);
    }
    nodes_ += wrap(1, n);
  }

  std::string serialize() const {
    std::string graph = nodes_;
    bytes_field(graph, 2, "backbone");
    graph += initializers_ + inputs_ + outputs_;
    std::string model;
    varint_field(model, 1, 7);
    bytes_field(model, 2, "aqilung-tests");
    std::string opset;
    varint_field(opset, 2, 13);
    model += wrap(8, opset);
    model += wrap(7, graph);
    return model;
  }

  std::vector<std::uint8_t> bytes() const {
    const std::string s = serialize();
    return {s.begin(), s.end()};
  }

 private:
  static void put_varint(std::string& out, std::uint64_t v) {
    while (v >= 0x80) {
      out.push_back(static_cast<char>((v & 0x7F) | 0x80));
      v >>= 7;
    }
    out.push_back(static_cast<char>(v));
  }
  static void varint_field(std::string& out, int field, std::uint64_t v) {
    put_varint(out, static_cast<std::uint64_t>(field) << 3);
    put_varint(out, v);
  }
  static void bytes_field(std::string& out, int field, const std::string& v) {
    put_varint(out, (static_cast<std::uint64_t>(field) << 3) | 2);
    put_varint(out, v.size());
    out += v;
  }
  static std::string wrap(int field, const std::string& v) {
    std::string out;
    bytes_field(out, field, v);
    return out;
  }
  static std::string value_info(const std::string& name, const std::vector<std::int64_t>& dims) {
    std::string shape;
    for (auto d : dims) {
      std::string dim;
      varint_field(dim, 1, static_cast<std::uint64_t>(d));
      shape += wrap(1, dim);
    }
    std::string tensor_type;
    varint_field(tensor_type, 1, 1);
    tensor_type += wrap(2, shape);
    const std::string type = wrap(1, tensor_type);
    std::string vi;
    bytes_field(vi, 1, name);
    vi += wrap(2, type);
    return vi;
  }

  std::string nodes_, initializers_, inputs_, outputs_;
};

inline OnnxWriter::Attr ints_attr(std::string name, std::vector<std::int64_t> v) {
  return {std::move(name), std::move(v), true, 0, {}};
}

/// VGG16 convolutional trunk (13 conv + 5 pool) with He-scaled random
/// weights: NHWC input, NCHW output [1, 512, 7, 7].
inline std::vector<std::uint8_t> vgg16_topology_model(std::uint64_t seed) {
  OnnxWriter w;
  w.input("input", {1, 224, 224, 3});
  w.node("Transpose", {"input"}, "x0", {ints_attr("perm", {0, 3, 1, 2})});
  const std::vector<std::vector<int>> blocks{{64, 64}, {128, 128}, {256, 256, 256}, {512, 512, 512}, {512, 512, 512}};
  SeededRng rng(seed);
  std::int64_t in_ch = 3;
  std::string x = "x0";
  int layer = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (int out_ch : blocks[b]) {
      const std::string id = "conv" + std::to_string(++layer);
      const std::size_t n = static_cast<std::size_t>(out_ch * in_ch * 9);
      std::vector<float> weights(n);
      const double scale = std::sqrt(2.0 / static_cast<double>(in_ch * 9));
      for (float& v : weights) v = static_cast<float>(scale * rng.normal());
      std::vector<float> bias(static_cast<std::size_t>(out_ch));
      for (float& v : bias) v = static_cast<float>(0.01 * rng.normal());
      w.initializer(id + ".w", {out_ch, in_ch, 3, 3}, weights);
      w.initializer(id + ".b", {out_ch}, bias);
      w.node("Conv", {x, id + ".w", id + ".b"}, id,
             {ints_attr("kernel_shape", {3, 3}), ints_attr("pads", {1, 1, 1, 1}), ints_attr("strides", {1, 1})});
      w.node("Relu", {id}, id + ".relu");
      x = id + ".relu";
      in_ch = out_ch;
    }
    const std::string pool = "pool" + std::to_string(b + 1);
    w.node("MaxPool", {x}, pool, {ints_attr("kernel_shape", {2, 2}), ints_attr("strides", {2, 2})});
    x = pool;
  }
  w.output(x);
  return w.bytes();
}

}  // namespace aqilung::testing
