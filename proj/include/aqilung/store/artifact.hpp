// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aqilung/checksum.hpp"
#include "aqilung/error.hpp"
#include "aqilung/tensor.hpp"

namespace aqilung::store {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kWeightsFile = "weights.bin";

using Json = nlohmann::ordered_json;

/// Float arrays appended in order; serialized as 64-bit little-endian.
class WeightWriter {
 public:
  void add(const std::string& name, const std::vector<std::size_t>& shape, std::span<const double> values) {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    if (n != values.size()) throw DimensionError("array '" + name + "' shape does not match its length");
    entries_.push_back({{"name", name}, {"shape", shape}});
    for (double v : values) {
      const auto u = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) bytes_.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
    }
  }
  void add(const std::string& name, const Tensor& t) { add(name, t.shape(), t.data()); }
  void add(const std::string& name, std::span<const double> v) { add(name, {v.size()}, v); }
  void add_scalar(const std::string& name, double v) { add(name, {1}, std::span<const double>(&v, 1)); }

  const Json& entries() const noexcept { return entries_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

 private:
  Json entries_ = Json::array();
  std::vector<std::uint8_t> bytes_;
};

/// Reads arrays back in the order the manifest declares them. Each take()
/// names the array it expects, so a reordered manifest is rejected.
class WeightReader {
 public:
  WeightReader(const Json& entries, std::span<const std::uint8_t> bytes) : entries_(entries), bytes_(bytes) {
    if (!entries_.is_array()) throw SchemaError("manifest 'arrays' must be a list");
  }

  std::pair<std::vector<std::size_t>, std::vector<double>> take(std::string_view name) {
    if (next_ >= entries_.size()) throw SchemaError("manifest has no array '" + std::string(name) + "'");
    const auto& e = entries_[next_++];
    if (e.at("name").get<std::string>() != name) {
      throw SchemaError("expected array '" + std::string(name) + "', manifest has '" + e.at("name").get<std::string>() + "'");
    }
    const auto shape = e.at("shape").get<std::vector<std::size_t>>();
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    if (offset_ + 8 * n > bytes_.size()) throw SchemaError("weights blob is shorter than the manifest declares");
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t u = 0;
      for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes_[offset_ + 8 * i + b]) << (8 * b);
      values[i] = std::bit_cast<double>(u);
    }
    offset_ += 8 * n;
    return {shape, std::move(values)};
  }

  Tensor tensor(std::string_view name) {
    auto [shape, values] = take(name);
    return Tensor(std::move(shape), std::move(values));
  }
  std::vector<double> vector(std::string_view name) { return take(name).second; }
  double scalar(std::string_view name) {
    const auto v = vector(name);
    if (v.size() != 1) throw SchemaError("array '" + std::string(name) + "' is not a scalar");
    return v[0];
  }

  void finish() const {
    if (next_ != entries_.size() || offset_ != bytes_.size()) {
      throw SchemaError("weights blob has data the model did not consume");
    }
  }

 private:
  const Json& entries_;
  std::span<const std::uint8_t> bytes_;
  std::size_t next_ = 0;
  std::size_t offset_ = 0;
};

struct Artifact {
  Json manifest;
  std::vector<std::uint8_t> weights;

  std::string kind() const { return manifest.at("kind").get<std::string>(); }
  WeightReader reader() const { return WeightReader(manifest.at("arrays"), weights); }
};

namespace detail {

inline void write_file_synced(const std::filesystem::path& p, std::span<const std::uint8_t> bytes) {
  const int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw IoError(p.string(), "cannot create file");
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n <= 0) {
      ::close(fd);
      throw IoError(p.string(), "write failed");
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) throw IoError(p.string(), "flush failed");
}

inline std::string random_suffix() {
  std::random_device rd;
  return std::to_string(::getpid()) + "-" + std::to_string(rd());
}

inline std::vector<std::uint8_t> read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(p.string(), "cannot open");
  std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(p.string(), "read failed");
  return out;
}

}  // namespace detail

/// Replaces `path` with `text` via a synced temp sibling and rename, so
/// readers see either the old file or the new one.
inline void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(path.parent_path().string(), "cannot create directory: " + ec.message());
  const auto tmp = path.parent_path() / ("." + path.filename().string() + ".tmp-" + detail::random_suffix());
  detail::write_file_synced(tmp, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(path.string(), "cannot replace file");
  }
}

/// Writes `<dir>/manifest.json` and `<dir>/weights.bin`. Both go to a
/// sibling temp directory first, which is renamed into place; an existing
/// artifact at `dir` is replaced.
inline void write_artifact(const std::filesystem::path& dir, Json manifest, const WeightWriter& weights) {
  namespace fs = std::filesystem;
  manifest["schema_version"] = kSchemaVersion;
  manifest["arrays"] = weights.entries();
  manifest["weights"] = {{"file", kWeightsFile},
                         {"bytes", weights.bytes().size()},
                         {"encoding", "float64-le"},
                         {"sha256", sha256_hex(weights.bytes())}};
  // Put schema_version first for readers skimming the file.
  Json ordered = {{"schema_version", kSchemaVersion}};
  for (auto it = manifest.begin(); it != manifest.end(); ++it) {
    if (it.key() != "schema_version") ordered[it.key()] = it.value();
  }
  const std::string text = ordered.dump(2) + "\n";

  const fs::path target = fs::absolute(dir).lexically_normal();
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp-" + detail::random_suffix());
  if (!fs::create_directory(tmp, ec)) throw IoError(tmp.string(), "cannot create temp directory: " + ec.message());
  try {
    detail::write_file_synced(tmp / kWeightsFile, weights.bytes());
    detail::write_file_synced(tmp / kManifestFile,
                              std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    fs::path old;
    if (fs::exists(target)) {
      old = target.parent_path() / ("." + target.filename().string() + ".old-" + detail::random_suffix());
      fs::rename(target, old);
    }
    fs::rename(tmp, target);
    if (!old.empty()) fs::remove_all(old, ec);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(tmp, ec);
    throw IoError(target.string(), e.what());
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
}

inline Json read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestFile;
  const auto bytes = detail::read_all(path);
  Json manifest;
  try {
    manifest = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("schema_version") || !manifest["schema_version"].is_number_integer()) {
    throw SchemaError(path.string() + ": missing schema_version");
  }
  const int version = manifest["schema_version"].get<int>();
  if (version != kSchemaVersion) {
    throw VersionError(path.string() + ": schema_version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kSchemaVersion) + ")");
  }
  return manifest;
}

/// Reads and verifies an artifact. `expected_kind`, when given, must match.
inline Artifact read_artifact(const std::filesystem::path& dir, std::optional<std::string_view> expected_kind = {}) {
  Artifact a;
  a.manifest = read_manifest(dir);
  try {
    const auto kind = a.kind();
    if (expected_kind && kind != *expected_kind) {
      throw SchemaError(dir.string() + ": artifact kind '" + kind + "', expected '" + std::string(*expected_kind) + "'");
    }
    const auto& w = a.manifest.at("weights");
    a.weights = detail::read_all(dir / w.at("file").get<std::string>());
    if (a.weights.size() != w.at("bytes").get<std::size_t>()) {
      throw ChecksumError(dir.string() + ": weights.bin has " + std::to_string(a.weights.size()) + " bytes, manifest says " +
                          std::to_string(w.at("bytes").get<std::size_t>()));
    }
    if (sha256_hex(a.weights) != w.at("sha256").get<std::string>()) {
      throw ChecksumError(dir.string() + ": weights.bin checksum mismatch");
    }
  } catch (const Json::exception& e) {
    throw SchemaError(dir.string() + ": " + e.what());
  }
  return a;
}

}  // namespace aqilung::store
