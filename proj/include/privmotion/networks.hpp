// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "privmotion/gcn.hpp"

namespace privmotion {

// Parameter-name prefixes. Checkpoints are keyed by these, so they are part
// of the on-disk schema.
inline constexpr const char* kItpObsPrefix = "itp.obs";
inline constexpr const char* kItpPrivPrefix = "itp.priv";
inline constexpr const char* kItpDecPrefix = "itp.dec";
inline constexpr const char* kFpObsPrefix = "fp.obs";
inline constexpr const char* kFpSimPrefix = "fp.sim";
inline constexpr const char* kFpDecPrefix = "fp.dec";
inline constexpr const char* kPslObsPrefix = "psl.obs";
inline constexpr const char* kPslDecPrefix = "psl.dec";

/// Widths shared by every codec in one experiment, plus the outermost skip
/// weights. The 0.7:0.3 split rides on the input skip; the alternative
/// reading (weighting the encoder fusion instead) is one config change away.
struct NetworkConfig {
  std::size_t k = 0;       // pose parameters per frame
  std::size_t coeffs = 0;  // DCT coefficients kept (C)
  std::size_t hidden = 256;
  double itp_skip_obs = 0.7;
  double itp_skip_priv = 0.3;
  double fp_skip = 1.0;
};

inline CodecShape encoder_shape(const NetworkConfig& cfg) {
  return CodecShape{cfg.k, cfg.coeffs, cfg.hidden, cfg.hidden, false};
}

inline CodecShape decoder_shape(const NetworkConfig& cfg) {
  return CodecShape{cfg.k, cfg.hidden, cfg.hidden, cfg.coeffs, true};
}

// ---------------------------------------------------------------------------
// Initialization. Draw order is fixed by registration order, so one seed
// pins the whole network.
// ---------------------------------------------------------------------------

inline ParamStore init_itp_store(const NetworkConfig& cfg, Rng& rng) {
  ParamStore ps;
  register_codec(ps, kItpObsPrefix, init_codec(encoder_shape(cfg), rng));
  register_codec(ps, kItpPrivPrefix, init_codec(encoder_shape(cfg), rng));
  register_codec(ps, kItpDecPrefix, init_codec(decoder_shape(cfg), rng));
  return ps;
}

inline ParamStore init_fp_store(const NetworkConfig& cfg, Rng& rng) {
  ParamStore ps;
  register_codec(ps, kFpObsPrefix, init_codec(encoder_shape(cfg), rng));
  register_codec(ps, kFpSimPrefix, init_codec(encoder_shape(cfg), rng));
  register_codec(ps, kFpDecPrefix, init_codec(decoder_shape(cfg), rng));
  return ps;
}

inline ParamStore init_psl_store(const NetworkConfig& cfg, Rng& rng) {
  ParamStore ps;
  register_codec(ps, kPslObsPrefix, init_codec(encoder_shape(cfg), rng));
  register_codec(ps, kPslDecPrefix, init_codec(decoder_shape(cfg), rng));
  return ps;
}

inline void validate_itp_store(const ParamStore& ps, const NetworkConfig& cfg) {
  validate_codec(ps, kItpObsPrefix, encoder_shape(cfg));
  validate_codec(ps, kItpPrivPrefix, encoder_shape(cfg));
  validate_codec(ps, kItpDecPrefix, decoder_shape(cfg));
}

inline void validate_fp_store(const ParamStore& ps, const NetworkConfig& cfg) {
  validate_codec(ps, kFpObsPrefix, encoder_shape(cfg));
  validate_codec(ps, kFpSimPrefix, encoder_shape(cfg));
  validate_codec(ps, kFpDecPrefix, decoder_shape(cfg));
}

inline void validate_psl_store(const ParamStore& ps, const NetworkConfig& cfg) {
  validate_codec(ps, kPslObsPrefix, encoder_shape(cfg));
  validate_codec(ps, kPslDecPrefix, decoder_shape(cfg));
}

// ---------------------------------------------------------------------------
// Graph forwards. Each returns the coefficient-space output plus the tapped
// representation (E for ITP, S for FP).
// ---------------------------------------------------------------------------

struct ItpForward {
  NodeId h_itp;
  NodeId e;
};

struct FpForward {
  NodeId h_fp;
  NodeId s;
};

/// h_itp = dec(obs_enc(h_obs) + priv_enc(h_priv)) + 0.7 h_obs + 0.3 h_priv.
inline ItpForward itp_forward(ForwardCtx& ctx, const NetworkConfig& cfg,
                              NodeId h_obs, NodeId h_priv) {
  Graph& g = ctx.graph;
  const NodeId e = codec_forward(ctx, h_priv, kItpPrivPrefix, false);
  const NodeId latent = g.add(codec_forward(ctx, h_obs, kItpObsPrefix, false), e);
  const NodeId dec = codec_forward(ctx, latent, kItpDecPrefix, true);
  const NodeId skip = g.affine(cfg.itp_skip_obs, h_obs, cfg.itp_skip_priv, h_priv);
  return ItpForward{g.add(dec, skip), e};
}

/// h_fp = dec(obs_enc(h_obs) + pk_sim(h_obs)) + 1.0 h_obs. With all-zero
/// parameters this is the zero-velocity predictor.
inline FpForward fp_forward(ForwardCtx& ctx, const NetworkConfig& cfg,
                            NodeId h_obs) {
  Graph& g = ctx.graph;
  const NodeId s = codec_forward(ctx, h_obs, kFpSimPrefix, false);
  const NodeId latent = g.add(codec_forward(ctx, h_obs, kFpObsPrefix, false), s);
  const NodeId dec = codec_forward(ctx, latent, kFpDecPrefix, true);
  return FpForward{g.affine(1.0, dec, cfg.fp_skip, h_obs), s};
}

/// Single-network baseline: no simulator, decoder scores all frames. Wiring
/// otherwise mirrors fp_forward.
inline NodeId psl_forward(ForwardCtx& ctx, const NetworkConfig& cfg,
                          NodeId h_obs) {
  Graph& g = ctx.graph;
  const NodeId latent = codec_forward(ctx, h_obs, kPslObsPrefix, false);
  const NodeId dec = codec_forward(ctx, latent, kPslDecPrefix, true);
  return g.affine(1.0, dec, cfg.fp_skip, h_obs);
}

// ---------------------------------------------------------------------------
// Struct views + tape-free eval forwards. Op order matches the graph path
// exactly, so eval-mode graph runs and these agree bit for bit.
// ---------------------------------------------------------------------------

struct ItpNet {
  CodecParams obs_enc;
  CodecParams priv_enc;
  CodecParams dec;
};

struct FpNet {
  CodecParams obs_enc;
  CodecParams pk_sim;
  CodecParams dec;
};

struct PslNet {
  CodecParams obs_enc;
  CodecParams dec;
};

inline ItpNet extract_itp(const ParamStore& ps) {
  return ItpNet{extract_codec(ps, kItpObsPrefix, false),
                extract_codec(ps, kItpPrivPrefix, false),
                extract_codec(ps, kItpDecPrefix, true)};
}

inline FpNet extract_fp(const ParamStore& ps) {
  return FpNet{extract_codec(ps, kFpObsPrefix, false),
               extract_codec(ps, kFpSimPrefix, false),
               extract_codec(ps, kFpDecPrefix, true)};
}

inline PslNet extract_psl(const ParamStore& ps) {
  return PslNet{extract_codec(ps, kPslObsPrefix, false),
                extract_codec(ps, kPslDecPrefix, true)};
}

struct ItpEval {
  Mat h_itp;
  Mat e;
};

struct FpEval {
  Mat h_fp;
  Mat s;
};

inline ItpEval itp_eval(const ItpNet& net, const NetworkConfig& cfg,
                        const Mat& h_obs, const Mat& h_priv) {
  if (!h_obs.same_shape(h_priv)) {
    throw DimensionError("itp_eval: observed " + h_obs.shape_str() +
                         " vs privileged " + h_priv.shape_str());
  }
  Mat e = codec_eval(h_priv, net.priv_enc);
  const Mat latent = affine(1.0, codec_eval(h_obs, net.obs_enc), 1.0, e);
  const Mat dec = codec_eval(latent, net.dec);
  const Mat skip = affine(cfg.itp_skip_obs, h_obs, cfg.itp_skip_priv, h_priv);
  return ItpEval{affine(1.0, dec, 1.0, skip), std::move(e)};
}

inline FpEval fp_eval(const FpNet& net, const NetworkConfig& cfg,
                      const Mat& h_obs) {
  Mat s = codec_eval(h_obs, net.pk_sim);
  const Mat latent = affine(1.0, codec_eval(h_obs, net.obs_enc), 1.0, s);
  const Mat dec = codec_eval(latent, net.dec);
  return FpEval{affine(1.0, dec, cfg.fp_skip, h_obs), std::move(s)};
}

inline Mat psl_eval(const PslNet& net, const NetworkConfig& cfg,
                    const Mat& h_obs) {
  const Mat dec = codec_eval(codec_eval(h_obs, net.obs_enc), net.dec);
  return affine(1.0, dec, cfg.fp_skip, h_obs);
}

}  // namespace privmotion
