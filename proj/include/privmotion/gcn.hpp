// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <unordered_map>

#include "privmotion/errors.hpp"
#include "privmotion/graph.hpp"
#include "privmotion/param_store.hpp"
#include "privmotion/rng.hpp"

namespace privmotion {

inline constexpr std::size_t kResidualBlocks = 4;

enum class Activation { kNone, kTanh };

/// One graph-convolution layer: h -> act(A * h * W) with a learnable K x K
/// adjacency A (unconstrained, fully-connected graph) and F_in x F_out
/// weight W. No bias.
struct GcLayerParams {
  Mat a;
  Mat w;
  Activation act = Activation::kTanh;
};

struct ResidualBlockParams {
  GcLayerParams first;
  GcLayerParams second;
};

/// Encoder/decoder stack: an input GC-Layer, four residual blocks of two
/// GC-Layers each, and an output GC-Layer.
struct CodecParams {
  GcLayerParams in;
  std::array<ResidualBlockParams, kResidualBlocks> blocks;
  GcLayerParams out;
};

/// Widths of a codec. `decoder_output` makes the final layer linear
/// (DCT coefficients are unbounded); encoder outputs stay tanh-bounded.
struct CodecShape {
  std::size_t nodes = 0;      // K
  std::size_t width_in = 0;
  std::size_t hidden = 256;
  std::size_t width_out = 0;
  bool decoder_output = false;
};

inline std::size_t gc_layer_param_count(std::size_t nodes, std::size_t f_in,
                                        std::size_t f_out) {
  return nodes * nodes + f_in * f_out;
}

inline std::size_t codec_param_count(const CodecShape& s) {
  std::size_t n = gc_layer_param_count(s.nodes, s.width_in, s.hidden);
  n += 2 * kResidualBlocks * gc_layer_param_count(s.nodes, s.hidden, s.hidden);
  n += gc_layer_param_count(s.nodes, s.hidden, s.width_out);
  return n;
}

/// Uniform init: W in +-1/sqrt(F_in), A in +-1/sqrt(K). Draw order is fixed
/// (per layer: A then W; layers in stack order) so a seed pins every value.
inline GcLayerParams init_gc_layer(std::size_t nodes, std::size_t f_in,
                                   std::size_t f_out, Activation act, Rng& rng) {
  GcLayerParams p;
  p.act = act;
  p.a = Mat(nodes, nodes);
  const double ab = 1.0 / std::sqrt(static_cast<double>(nodes));
  for (std::size_t i = 0; i < p.a.size(); ++i) p.a.data()[i] = rng.uniform(-ab, ab);
  p.w = Mat(f_in, f_out);
  const double wb = 1.0 / std::sqrt(static_cast<double>(f_in));
  for (std::size_t i = 0; i < p.w.size(); ++i) p.w.data()[i] = rng.uniform(-wb, wb);
  return p;
}

inline CodecParams init_codec(const CodecShape& s, Rng& rng) {
  if (s.nodes == 0 || s.width_in == 0 || s.hidden == 0 || s.width_out == 0) {
    throw ConfigError("init_codec: all widths must be positive");
  }
  CodecParams c;
  c.in = init_gc_layer(s.nodes, s.width_in, s.hidden, Activation::kTanh, rng);
  for (auto& b : c.blocks) {
    b.first = init_gc_layer(s.nodes, s.hidden, s.hidden, Activation::kTanh, rng);
    b.second = init_gc_layer(s.nodes, s.hidden, s.hidden, Activation::kTanh, rng);
  }
  c.out = init_gc_layer(s.nodes, s.hidden, s.width_out,
                        s.decoder_output ? Activation::kNone : Activation::kTanh,
                        rng);
  return c;
}

// ---------------------------------------------------------------------------
// ParamStore naming:  <prefix>.in.{A,W}, <prefix>.block<1..4>.layer<1..2>.{A,W},
// <prefix>.out.{A,W}. Registration order matches stack order.
// ---------------------------------------------------------------------------

inline std::vector<std::string> codec_layer_prefixes(const std::string& prefix) {
  std::vector<std::string> out;
  out.push_back(prefix + ".in");
  for (std::size_t b = 1; b <= kResidualBlocks; ++b) {
    out.push_back(prefix + ".block" + std::to_string(b) + ".layer1");
    out.push_back(prefix + ".block" + std::to_string(b) + ".layer2");
  }
  out.push_back(prefix + ".out");
  return out;
}

inline std::vector<std::string> codec_param_names(const std::string& prefix) {
  std::vector<std::string> out;
  for (const std::string& lp : codec_layer_prefixes(prefix)) {
    out.push_back(lp + ".A");
    out.push_back(lp + ".W");
  }
  return out;
}

inline void register_codec(ParamStore& ps, const std::string& prefix,
                           CodecParams c) {
  auto put = [&](const std::string& lp, GcLayerParams& l) {
    ps.add(lp + ".A", std::move(l.a));
    ps.add(lp + ".W", std::move(l.w));
  };
  put(prefix + ".in", c.in);
  for (std::size_t b = 0; b < kResidualBlocks; ++b) {
    put(prefix + ".block" + std::to_string(b + 1) + ".layer1", c.blocks[b].first);
    put(prefix + ".block" + std::to_string(b + 1) + ".layer2", c.blocks[b].second);
  }
  put(prefix + ".out", c.out);
}

/// Rebuilds the struct view of a codec from its store entries.
inline CodecParams extract_codec(const ParamStore& ps, const std::string& prefix,
                                 bool decoder_output) {
  auto get = [&](const std::string& lp, Activation act) {
    if (!ps.contains(lp + ".A") || !ps.contains(lp + ".W")) {
      throw CheckpointError("missing parameter '" + lp + ".A' / '" + lp +
                            ".W' in store");
    }
    return GcLayerParams{ps.at(lp + ".A"), ps.at(lp + ".W"), act};
  };
  CodecParams c;
  c.in = get(prefix + ".in", Activation::kTanh);
  for (std::size_t b = 0; b < kResidualBlocks; ++b) {
    const std::string bp = prefix + ".block" + std::to_string(b + 1);
    c.blocks[b].first = get(bp + ".layer1", Activation::kTanh);
    c.blocks[b].second = get(bp + ".layer2", Activation::kTanh);
  }
  c.out = get(prefix + ".out",
              decoder_output ? Activation::kNone : Activation::kTanh);
  return c;
}

/// Verifies that a store holds a codec of exactly the given widths; throws
/// CheckpointError naming the first offending parameter.
inline void validate_codec(const ParamStore& ps, const std::string& prefix,
                           const CodecShape& s) {
  auto expect = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    if (!ps.contains(name)) {
      throw CheckpointError("missing parameter '" + name + "'");
    }
    const Mat& m = ps.at(name);
    if (m.rows() != rows || m.cols() != cols) {
      throw CheckpointError("parameter '" + name + "' has shape " +
                            m.shape_str() + ", expected " + std::to_string(rows) +
                            "x" + std::to_string(cols));
    }
  };
  const auto prefixes = codec_layer_prefixes(prefix);
  expect(prefixes.front() + ".A", s.nodes, s.nodes);
  expect(prefixes.front() + ".W", s.width_in, s.hidden);
  for (std::size_t i = 1; i + 1 < prefixes.size(); ++i) {
    expect(prefixes[i] + ".A", s.nodes, s.nodes);
    expect(prefixes[i] + ".W", s.hidden, s.hidden);
  }
  expect(prefixes.back() + ".A", s.nodes, s.nodes);
  expect(prefixes.back() + ".W", s.hidden, s.width_out);
}

// ---------------------------------------------------------------------------
// Graph forward
// ---------------------------------------------------------------------------

/// Per-graph forward state: binds store parameters to graph leaves (once per
/// name, so a batch reuses the same leaf) and carries the train/eval mode.
struct ForwardCtx {
  Graph& graph;
  const ParamStore& params;
  bool training = false;
  double dropout_rate = 0.0;
  Rng* rng = nullptr;

  NodeId bind(const std::string& name) {
    auto it = bound.find(name);
    if (it != bound.end()) return it->second;
    const NodeId id = graph.leaf(name, params.at(name));
    bound.emplace(name, id);
    return id;
  }

  std::unordered_map<std::string, NodeId> bound = {};
};

/// act(A * h * W), with dropout after the activation when the layer is
/// droppable and the context is in training mode.
inline NodeId gc_layer(ForwardCtx& ctx, NodeId h, const std::string& layer_prefix,
                       Activation act, bool droppable) {
  Graph& g = ctx.graph;
  NodeId z = g.matmul(ctx.bind(layer_prefix + ".A"), h);
  z = g.matmul(z, ctx.bind(layer_prefix + ".W"));
  if (act == Activation::kTanh) z = g.tanh_act(z);
  if (droppable && ctx.training && ctx.dropout_rate > 0.0) {
    if (ctx.rng == nullptr) {
      throw ContractError("gc_layer: training-mode dropout needs an rng");
    }
    z = g.dropout(z, ctx.dropout_rate, true, *ctx.rng);
  }
  return z;
}

/// h + layer2(layer1(h)); the skip weight inside a block is 1.
inline NodeId residual_block(ForwardCtx& ctx, NodeId h,
                             const std::string& block_prefix) {
  NodeId z = gc_layer(ctx, h, block_prefix + ".layer1", Activation::kTanh, true);
  z = gc_layer(ctx, z, block_prefix + ".layer2", Activation::kTanh, true);
  return ctx.graph.add(h, z);
}

/// Full codec stack. The output layer is linear for decoders, tanh for
/// encoders, and never droppable.
inline NodeId codec_forward(ForwardCtx& ctx, NodeId h, const std::string& prefix,
                            bool decoder_output) {
  NodeId z = gc_layer(ctx, h, prefix + ".in", Activation::kTanh, true);
  for (std::size_t b = 1; b <= kResidualBlocks; ++b) {
    z = residual_block(ctx, z, prefix + ".block" + std::to_string(b));
  }
  return gc_layer(ctx, z, prefix + ".out",
                  decoder_output ? Activation::kNone : Activation::kTanh, false);
}

// ---------------------------------------------------------------------------
// Struct-level eval forward (no tape, no dropout). Op order matches the graph
// path exactly — (A*h)*W — so both give bit-identical values.
// ---------------------------------------------------------------------------

inline Mat gc_layer_eval(const Mat& h, const GcLayerParams& p) {
  if (p.a.cols() != h.rows()) {
    throw DimensionError("gc_layer: adjacency " + p.a.shape_str() +
                         " does not match input " + h.shape_str());
  }
  if (h.cols() != p.w.rows()) {
    throw DimensionError("gc_layer: input " + h.shape_str() +
                         " does not match weight " + p.w.shape_str());
  }
  Mat z = matmul(matmul(p.a, h), p.w);
  if (p.act == Activation::kTanh) {
    for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = std::tanh(z.data()[i]);
  }
  return z;
}

inline Mat residual_block_eval(const Mat& h, const ResidualBlockParams& b) {
  Mat z = gc_layer_eval(gc_layer_eval(h, b.first), b.second);
  return affine(1.0, h, 1.0, z);
}

inline Mat codec_eval(const Mat& h, const CodecParams& c) {
  Mat z = gc_layer_eval(h, c.in);
  for (const auto& b : c.blocks) z = residual_block_eval(z, b);
  return gc_layer_eval(z, c.out);
}

}  // namespace privmotion
