// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "privmotion/errors.hpp"
#include "privmotion/graph.hpp"
#include "privmotion/mat.hpp"

namespace privmotion {

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// First and second moment estimates, same shape as the parameter.
struct AdamState {
  Mat m;
  Mat v;
};

/// All learnable tensors of a model plus their optimizer state, addressable
/// by stable dotted names (e.g. "itp.obs.block2.layer1.W"). Insertion order
/// is preserved and defines the serialization order.
class ParamStore {
 public:
  void add(std::string name, Mat value) {
    if (index_.count(name)) {
      throw ContractError("ParamStore: duplicate parameter '" + name + "'");
    }
    AdamState st{Mat(value.rows(), value.cols()), Mat(value.rows(), value.cols())};
    index_[name] = entries_.size();
    entries_.push_back({std::move(name), std::move(value), std::move(st)});
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Mat& at(const std::string& name) { return entries_[find(name)].value; }
  const Mat& at(const std::string& name) const { return entries_[find(name)].value; }

  AdamState& adam_state(const std::string& name) { return entries_[find(name)].adam; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
  }

  std::size_t size() const noexcept { return entries_.size(); }

  std::size_t value_count() const noexcept {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  /// Number of completed optimizer steps.
  std::uint64_t adam_steps() const noexcept { return step_; }

  friend void adam_step(ParamStore&, const GradMap&, double, double);

 private:
  struct Entry {
    std::string name;
    Mat value;
    AdamState adam;
  };

  std::size_t find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw ContractError("ParamStore: unknown parameter '" + name + "'");
    }
    return it->second;
  }

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t step_ = 0;
};

/// One Adam update over every parameter in the store. The global gradient
/// norm is clipped to `clip_norm` first, then the standard bias-corrected
/// update is applied in insertion order. Deterministic given its inputs.
inline void adam_step(ParamStore& ps, const GradMap& grads, double lr,
                      double clip_norm) {
  if (lr <= 0.0) {
    throw ConfigError("adam_step: lr must be positive, got " + std::to_string(lr));
  }
  for (const auto& e : ps.entries_) {
    auto it = grads.find(e.name);
    if (it == grads.end()) {
      throw ContractError("adam_step: missing gradient for parameter '" +
                          e.name + "'");
    }
    if (!it->second.same_shape(e.value)) {
      throw DimensionError("adam_step: gradient for '" + e.name + "' is " +
                           it->second.shape_str() + ", parameter is " +
                           e.value.shape_str());
    }
  }
  for (const auto& [name, g] : grads) {
    if (!ps.contains(name)) {
      throw ContractError("adam_step: gradient for unknown parameter '" + name +
                          "'");
    }
  }

  double sq = 0.0;
  for (const auto& [name, g] : grads) {
    for (std::size_t i = 0; i < g.size(); ++i) sq += g.data()[i] * g.data()[i];
  }
  const double norm = std::sqrt(sq);
  const double clip = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;

  ps.step_ += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(ps.step_));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(ps.step_));
  for (auto& e : ps.entries_) {
    const Mat& g = grads.at(e.name);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double gi = g.data()[i] * clip;
      double& m = e.adam.m.data()[i];
      double& v = e.adam.v.data()[i];
      m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * gi;
      v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * gi * gi;
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      e.value.data()[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
    }
  }
}

// ---------------------------------------------------------------------------
// Checkpoint container (.pkck)
//
//   "PKG1"
//   repeated:  u32 name_len (> 0) | name bytes | u32 rows | u32 cols |
//              rows*cols f64 values
//   u32 0      (terminator)
//   metadata   UTF-8 key=value lines, sorted by key
//
// All integers and floats are little-endian. Optimizer state is not stored.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double d) {
  const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, const std::string& context)
      : bytes_(bytes), context_(context) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  std::string str(std::size_t len) {
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  std::string rest() { return bytes_.substr(pos_); }
  std::size_t offset() const { return pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw FormatError(context_ + ": unexpected end of file at offset " +
                        std::to_string(bytes_.size()) + " (needed " +
                        std::to_string(pos_ + n) + " bytes)");
    }
  }

  const std::string& bytes_;
  std::string context_;
  std::size_t pos_ = 0;
};

}  // namespace detail

using MetaMap = std::map<std::string, std::string>;

inline std::string serialize_checkpoint(const ParamStore& ps, const MetaMap& meta) {
  std::string out = "PKG1";
  for (const std::string& name : ps.names()) {
    const Mat& m = ps.at(name);
    detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (std::size_t i = 0; i < m.size(); ++i) detail::put_f64(out, m.data()[i]);
  }
  detail::put_u32(out, 0);
  for (const auto& [k, v] : meta) out += k + "=" + v + "\n";
  return out;
}

struct Checkpoint {
  ParamStore params;
  MetaMap meta;
};

inline Checkpoint parse_checkpoint(const std::string& bytes, const std::string& context) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "PKG1") {
    throw FormatError(context + ": bad magic at offset 0 (expected \"PKG1\")");
  }
  detail::ByteReader r(bytes, context);
  r.str(4);
  Checkpoint ck;
  for (;;) {
    const std::uint32_t name_len = r.u32();
    if (name_len == 0) break;
    const std::string name = r.str(name_len);
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    Mat m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
    ck.params.add(name, std::move(m));
  }
  const std::string trailer = r.rest();
  std::size_t start = 0;
  while (start < trailer.size()) {
    std::size_t end = trailer.find('\n', start);
    if (end == std::string::npos) end = trailer.size();
    const std::string line = trailer.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(context + ": malformed metadata line '" + line + "'");
    }
    ck.meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return ck;
}

inline void save_checkpoint(const ParamStore& ps, const MetaMap& meta,
                            const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string bytes = serialize_checkpoint(ps, meta);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("short write to '" + path.string() + "'");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes, "checkpoint " + path.string());
}

}  // namespace privmotion
