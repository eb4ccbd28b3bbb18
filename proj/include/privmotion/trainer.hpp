// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "privmotion/dct.hpp"
#include "privmotion/losses.hpp"
#include "privmotion/networks.hpp"
#include "privmotion/preprocess.hpp"
#include "privmotion/strings.hpp"

namespace privmotion {

/// Hyperparameters. The numeric defaults are the published training recipe;
/// the acceptance suite audits them, so change them via config, not here.
struct TrainConfig {
  std::size_t n = 10;   // observed frames
  std::size_t t = 25;   // predicted frames
  std::size_t p = 10;   // privileged frames
  std::size_t coeffs = 0;  // DCT coefficients kept; 0 = all N+T+P (lossless)
  std::size_t hidden = 256;
  double lr0 = 0.0005;
  double decay = 0.96;
  std::size_t decay_every = 2;
  double dropout = 0.5;
  std::size_t batch = 16;
  std::size_t epochs_itp = 50;
  std::size_t epochs_fp = 50;
  double lambda = 0.6;
  double clip_norm = 1.0;
  std::uint64_t seed = 1;
  Metric metric = Metric::kMp;
  double itp_skip_obs = 0.7;
  double itp_skip_priv = 0.3;
  bool warm_start_fp = false;  // seed FP's obs/dec from the trained ITP

  std::size_t total() const noexcept { return n + t + p; }
  std::size_t coeff_count() const noexcept {
    return coeffs == 0 ? total() : coeffs;
  }
  NetworkConfig network(std::size_t k) const noexcept {
    return NetworkConfig{k,        coeff_count(), hidden,
                         itp_skip_obs, itp_skip_priv, 1.0};
  }
};

inline void validate_train_config(const TrainConfig& cfg) {
  if (cfg.n == 0 || cfg.t == 0) throw ConfigError("n and t must be >= 1");
  if (cfg.coeffs > cfg.total()) {
    throw ConfigError("coeffs=" + std::to_string(cfg.coeffs) +
                      " exceeds window length " + std::to_string(cfg.total()));
  }
  if (cfg.hidden == 0) throw ConfigError("hidden must be >= 1");
  if (!(cfg.lr0 > 0.0) || !std::isfinite(cfg.lr0)) {
    throw ConfigError("lr0 must be positive");
  }
  if (!(cfg.decay > 0.0) || cfg.decay > 1.0) {
    throw ConfigError("decay must be in (0, 1]");
  }
  if (cfg.decay_every == 0) throw ConfigError("decay_every must be >= 1");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw ConfigError("dropout must be in [0, 1)");
  }
  if (cfg.batch == 0) throw ConfigError("batch must be >= 1");
  if (cfg.lambda < 0.0) throw ConfigError("lambda must be >= 0");
  if (cfg.clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
  if (cfg.itp_skip_obs < 0.0 || cfg.itp_skip_priv < 0.0) {
    throw ConfigError("skip weights must be >= 0");
  }
}

/// lr0 * decay^floor(epoch / decay_every).
inline double lr_at(std::size_t epoch, const TrainConfig& cfg) {
  return cfg.lr0 *
         std::pow(cfg.decay, static_cast<double>(epoch / cfg.decay_every));
}

enum class Stage { kItp, kFp, kTp, kPsl };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kItp: return "itp";
    case Stage::kFp: return "fp";
    case Stage::kTp: return "tp";
    case Stage::kPsl: return "psl";
  }
  return "?";
}

inline Stage parse_stage(const std::string& s) {
  if (s == "itp") return Stage::kItp;
  if (s == "fp") return Stage::kFp;
  if (s == "tp") return Stage::kTp;
  if (s == "psl") return Stage::kPsl;
  throw CheckpointError("unknown stage '" + s + "'");
}

struct StageArtifacts {
  ParamStore params;
  std::vector<LossBreakdown> loss_curve;  // per-epoch mean over samples
  Stage stage = Stage::kItp;
};

// Seed-stream tags: every consumer of randomness derives its own stream from
// cfg.seed, so stages never share generator state.
inline constexpr std::uint64_t kStreamItpInit = 1;
inline constexpr std::uint64_t kStreamItpShuffle = 2;
inline constexpr std::uint64_t kStreamItpDropout = 3;
inline constexpr std::uint64_t kStreamFpInit = 4;
inline constexpr std::uint64_t kStreamFpShuffle = 5;
inline constexpr std::uint64_t kStreamFpDropout = 6;
inline constexpr std::uint64_t kStreamPslInit = 7;
inline constexpr std::uint64_t kStreamPslShuffle = 8;
inline constexpr std::uint64_t kStreamPslDropout = 9;

namespace detail {

struct TrainSample {
  Mat h_obs;    // K x C
  Mat h_priv;   // K x C, only when P >= 1
  Mat gt_full;  // K x (N+T+P)
  Mat gt_main;  // K x (N+T)
  Mat gt_tail;  // K x P privileged span, only when P >= 1
  Mat e;        // K x hidden distillation target, FP stage only
};

inline void check_windows(const std::vector<MotionWindow>& data,
                          const TrainConfig& cfg) {
  if (data.empty()) throw ConfigError("training dataset is empty");
  const std::size_t k = data.front().k();
  for (const MotionWindow& w : data) {
    if (w.n() != cfg.n || w.t() != cfg.t || w.p() != cfg.p || w.k() != k) {
      throw ConfigError("window shape K=" + std::to_string(w.k()) + " n/t/p=" +
                        std::to_string(w.n()) + "/" + std::to_string(w.t()) +
                        "/" + std::to_string(w.p()) +
                        " does not match the configured setting");
    }
  }
}

inline std::vector<TrainSample> prepare_samples(
    const std::vector<MotionWindow>& data, const TrainConfig& cfg,
    const DctBasis& basis) {
  std::vector<TrainSample> out;
  out.reserve(data.size());
  for (const MotionWindow& w : data) {
    TrainSample s;
    s.h_obs = dct_encode(pad_observed(w), basis);
    if (cfg.p > 0) {
      s.h_priv = dct_encode(pad_privileged(w), basis);
      s.gt_tail = w.privileged;
    }
    s.gt_full = full_sequence(w);
    s.gt_main = observed_target(w);
    out.push_back(std::move(s));
  }
  return out;
}

inline void accumulate_grads(GradMap& acc, const GradMap& g) {
  for (const auto& [name, mat] : g) {
    auto it = acc.find(name);
    if (it == acc.end()) {
      acc.emplace(name, mat);
    } else {
      axpy(1.0, mat, it->second);
    }
  }
}

inline void scale_grads(GradMap& g, double s) {
  for (auto& [name, mat] : g) {
    for (std::size_t i = 0; i < mat.size(); ++i) mat.data()[i] *= s;
  }
}

inline std::vector<std::size_t> epoch_order(std::size_t count, Rng& rng) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  return order;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stage 1: interpolation.
// ---------------------------------------------------------------------------

inline StageArtifacts train_itp(const std::vector<MotionWindow>& data,
                                const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (cfg.p == 0) throw ConfigError("ITP requires privileged poses (p >= 1)");
  detail::check_windows(data, cfg);

  const std::size_t k = data.front().k();
  if (cfg.metric == Metric::kMp && k % 3 != 0) {
    throw ConfigError("metric=mp needs K divisible by 3, got K=" +
                      std::to_string(k));
  }
  const NetworkConfig net = cfg.network(k);
  const DctBasis basis(cfg.total(), cfg.coeff_count());
  const auto samples = detail::prepare_samples(data, cfg, basis);

  Rng init_rng = Rng::derived(cfg.seed, kStreamItpInit);
  Rng shuffle_rng = Rng::derived(cfg.seed, kStreamItpShuffle);
  Rng dropout_rng = Rng::derived(cfg.seed, kStreamItpDropout);

  StageArtifacts art;
  art.stage = Stage::kItp;
  art.params = init_itp_store(net, init_rng);

  for (std::size_t epoch = 0; epoch < cfg.epochs_itp; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    const auto order = detail::epoch_order(samples.size(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t at = 0; at < order.size(); at += cfg.batch) {
      const std::size_t stop = std::min(order.size(), at + cfg.batch);
      GradMap grads;
      for (std::size_t i = at; i < stop; ++i) {
        const detail::TrainSample& s = samples[order[i]];
        Graph g;
        ForwardCtx ctx{g, art.params, true, cfg.dropout, &dropout_rng};
        const NodeId h_obs = g.constant(s.h_obs);
        const NodeId h_priv = g.constant(s.h_priv);
        const auto fwd = itp_forward(ctx, net, h_obs, h_priv);
        const NodeId pred = g.matmul(fwd.h_itp, g.constant(basis.basis()));
        const NodeId loss =
            loss_itp_node(g, pred, g.constant(s.gt_full), cfg.metric);
        detail::accumulate_grads(grads, g.backward(loss));
        loss_sum += g.scalar(loss);
      }
      detail::scale_grads(grads, 1.0 / static_cast<double>(stop - at));
      adam_step(art.params, grads, lr, cfg.clip_norm);
    }
    LossBreakdown lb;
    lb.metric = cfg.metric;
    lb.lambda = cfg.lambda;
    lb.itp = loss_sum / static_cast<double>(samples.size());
    lb.total = lb.itp;
    art.loss_curve.push_back(lb);
  }
  return art;
}

// ---------------------------------------------------------------------------
// Stage 2: prediction with a frozen interpolation network as teacher.
// ---------------------------------------------------------------------------

/// With itp == nullptr (or lambda == 0) this is plain prediction training —
/// the traditional pattern. The two spellings build identical graphs, so
/// their results are bit-identical under one seed.
inline StageArtifacts train_fp(const std::vector<MotionWindow>& data,
                               const ParamStore* itp, const TrainConfig& cfg,
                               Stage tag = Stage::kFp) {
  validate_train_config(cfg);
  detail::check_windows(data, cfg);

  const std::size_t k = data.front().k();
  if (cfg.metric == Metric::kMp && k % 3 != 0) {
    throw ConfigError("metric=mp needs K divisible by 3, got K=" +
                      std::to_string(k));
  }
  const NetworkConfig net = cfg.network(k);
  const bool distill = itp != nullptr && cfg.lambda > 0.0;
  if (distill && cfg.p == 0) {
    throw ConfigError("distillation requires privileged poses (p >= 1)");
  }
  if (itp != nullptr && (distill || cfg.warm_start_fp)) {
    try {
      validate_itp_store(*itp, net);
    } catch (const CheckpointError& e) {
      throw ConfigError(std::string("interpolation network does not match the "
                                    "configured shapes: ") +
                        e.what());
    }
  }

  const DctBasis basis(cfg.total(), cfg.coeff_count());
  auto samples = detail::prepare_samples(data, cfg, basis);
  if (distill) {
    // Distillation targets are produced in eval mode, so they are constant
    // across epochs: compute each sample's E once, up front.
    const CodecParams priv_enc = extract_codec(*itp, kItpPrivPrefix, false);
    for (auto& s : samples) s.e = codec_eval(s.h_priv, priv_enc);
  }

  Rng init_rng = Rng::derived(cfg.seed, kStreamFpInit);
  Rng shuffle_rng = Rng::derived(cfg.seed, kStreamFpShuffle);
  Rng dropout_rng = Rng::derived(cfg.seed, kStreamFpDropout);

  StageArtifacts art;
  art.stage = tag;
  art.params = init_fp_store(net, init_rng);
  if (cfg.warm_start_fp && itp != nullptr) {
    // The simulator has no interpolation-stage counterpart; only the shared
    // roles are copied.
    auto copy_codec = [&](const char* src, const char* dst) {
      const auto from = codec_param_names(src);
      const auto to = codec_param_names(dst);
      for (std::size_t i = 0; i < from.size(); ++i) {
        art.params.at(to[i]) = itp->at(from[i]);
      }
    };
    copy_codec(kItpObsPrefix, kFpObsPrefix);
    copy_codec(kItpDecPrefix, kFpDecPrefix);
  }

  for (std::size_t epoch = 0; epoch < cfg.epochs_fp; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    const auto order = detail::epoch_order(samples.size(), shuffle_rng);
    double fp_sum = 0.0;
    double simu_sum = 0.0;
    for (std::size_t at = 0; at < order.size(); at += cfg.batch) {
      const std::size_t stop = std::min(order.size(), at + cfg.batch);
      GradMap grads;
      for (std::size_t i = at; i < stop; ++i) {
        const detail::TrainSample& s = samples[order[i]];
        Graph g;
        ForwardCtx ctx{g, art.params, true, cfg.dropout, &dropout_rng};
        const auto fwd = fp_forward(ctx, net, g.constant(s.h_obs));
        const NodeId pred = g.matmul(fwd.h_fp, g.constant(basis.basis()));
        const NodeId floss =
            loss_fp_node(g, pred, g.constant(s.gt_main), cfg.metric);
        NodeId total = floss;
        if (distill) {
          const NodeId sloss = loss_simu_node(g, fwd.s, g.constant(s.e));
          total = loss_total_node(g, floss, sloss, cfg.lambda);
          simu_sum += g.scalar(sloss);
        }
        detail::accumulate_grads(grads, g.backward(total));
        fp_sum += g.scalar(floss);
      }
      detail::scale_grads(grads, 1.0 / static_cast<double>(stop - at));
      adam_step(art.params, grads, lr, cfg.clip_norm);
    }
    LossBreakdown lb;
    lb.metric = cfg.metric;
    lb.lambda = distill ? cfg.lambda : 0.0;
    lb.fp = fp_sum / static_cast<double>(samples.size());
    lb.simu = simu_sum / static_cast<double>(samples.size());
    lb.total = lb.fp + lb.lambda * lb.simu;
    art.loss_curve.push_back(lb);
  }
  return art;
}

// ---------------------------------------------------------------------------
// Baseline: score the privileged window directly with an extra loss term
// instead of distilling a representation.
// ---------------------------------------------------------------------------

inline StageArtifacts train_psl(const std::vector<MotionWindow>& data,
                                const TrainConfig& cfg, double psl_weight) {
  validate_train_config(cfg);
  if (psl_weight < 0.0) throw ConfigError("psl weight must be >= 0");
  if (cfg.p == 0) throw ConfigError("PSL requires privileged poses (p >= 1)");
  detail::check_windows(data, cfg);

  const std::size_t k = data.front().k();
  if (cfg.metric == Metric::kMp && k % 3 != 0) {
    throw ConfigError("metric=mp needs K divisible by 3, got K=" +
                      std::to_string(k));
  }
  const NetworkConfig net = cfg.network(k);
  const DctBasis basis(cfg.total(), cfg.coeff_count());
  const auto samples = detail::prepare_samples(data, cfg, basis);

  Rng init_rng = Rng::derived(cfg.seed, kStreamPslInit);
  Rng shuffle_rng = Rng::derived(cfg.seed, kStreamPslShuffle);
  Rng dropout_rng = Rng::derived(cfg.seed, kStreamPslDropout);

  StageArtifacts art;
  art.stage = Stage::kPsl;
  art.params = init_psl_store(net, init_rng);

  for (std::size_t epoch = 0; epoch < cfg.epochs_fp; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    const auto order = detail::epoch_order(samples.size(), shuffle_rng);
    double main_sum = 0.0;
    double tail_sum = 0.0;
    for (std::size_t at = 0; at < order.size(); at += cfg.batch) {
      const std::size_t stop = std::min(order.size(), at + cfg.batch);
      GradMap grads;
      for (std::size_t i = at; i < stop; ++i) {
        const detail::TrainSample& s = samples[order[i]];
        Graph g;
        ForwardCtx ctx{g, art.params, true, cfg.dropout, &dropout_rng};
        const NodeId h = psl_forward(ctx, net, g.constant(s.h_obs));
        const NodeId pred = g.matmul(h, g.constant(basis.basis()));
        const NodeId main =
            loss_fp_node(g, pred, g.constant(s.gt_main), cfg.metric);
        NodeId total = main;
        if (psl_weight > 0.0) {
          const NodeId tail_pred = g.slice_cols(pred, cfg.n + cfg.t, cfg.p);
          const NodeId tail =
              pose_error_node(g, tail_pred, g.constant(s.gt_tail), cfg.metric);
          total = loss_total_node(g, main, tail, psl_weight);
          tail_sum += g.scalar(tail);
        }
        detail::accumulate_grads(grads, g.backward(total));
        main_sum += g.scalar(main);
      }
      detail::scale_grads(grads, 1.0 / static_cast<double>(stop - at));
      adam_step(art.params, grads, lr, cfg.clip_norm);
    }
    LossBreakdown lb;
    lb.metric = cfg.metric;
    lb.lambda = psl_weight;
    lb.fp = main_sum / static_cast<double>(samples.size());
    lb.simu = tail_sum / static_cast<double>(samples.size());
    lb.total = lb.fp + psl_weight * lb.simu;
    art.loss_curve.push_back(lb);
  }
  return art;
}

// ---------------------------------------------------------------------------
// Checkpoint plumbing: the training recipe rides along as the metadata
// trailer, so a checkpoint alone reconstructs its network shapes.
// ---------------------------------------------------------------------------

inline MetaMap stage_meta(const TrainConfig& cfg, Stage stage, std::size_t k) {
  MetaMap m;
  m["stage"] = stage_name(stage);
  m["k"] = std::to_string(k);
  m["n"] = std::to_string(cfg.n);
  m["t"] = std::to_string(cfg.t);
  m["p"] = std::to_string(cfg.p);
  m["coeffs"] = std::to_string(cfg.coeffs);
  m["hidden"] = std::to_string(cfg.hidden);
  m["lr0"] = detail::fmt17(cfg.lr0);
  m["decay"] = detail::fmt17(cfg.decay);
  m["decay_every"] = std::to_string(cfg.decay_every);
  m["dropout"] = detail::fmt17(cfg.dropout);
  m["batch"] = std::to_string(cfg.batch);
  m["epochs_itp"] = std::to_string(cfg.epochs_itp);
  m["epochs_fp"] = std::to_string(cfg.epochs_fp);
  m["lambda"] = detail::fmt17(cfg.lambda);
  m["clip_norm"] = detail::fmt17(cfg.clip_norm);
  m["seed"] = std::to_string(cfg.seed);
  m["metric"] = metric_name(cfg.metric);
  m["itp_skip_obs"] = detail::fmt17(cfg.itp_skip_obs);
  m["itp_skip_priv"] = detail::fmt17(cfg.itp_skip_priv);
  m["warm_start_fp"] = cfg.warm_start_fp ? "1" : "0";
  return m;
}

namespace detail {

inline const std::string& meta_get(const MetaMap& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) {
    throw CheckpointError("checkpoint metadata missing key '" + key + "'");
  }
  return it->second;
}

inline double meta_real(const MetaMap& m, const std::string& key) {
  try {
    return parse_real(meta_get(m, key), "metadata key '" + key + "'");
  } catch (const ParseError& e) {
    throw CheckpointError(e.what());
  }
}

inline std::uint64_t meta_count(const MetaMap& m, const std::string& key) {
  const std::string& s = meta_get(m, key);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw CheckpointError("metadata key '" + key + "': bad count '" + s + "'");
  }
  return v;
}

}  // namespace detail

inline std::size_t k_from_meta(const MetaMap& m) {
  return static_cast<std::size_t>(detail::meta_count(m, "k"));
}

inline TrainConfig config_from_meta(const MetaMap& m) {
  TrainConfig cfg;
  cfg.n = static_cast<std::size_t>(detail::meta_count(m, "n"));
  cfg.t = static_cast<std::size_t>(detail::meta_count(m, "t"));
  cfg.p = static_cast<std::size_t>(detail::meta_count(m, "p"));
  cfg.coeffs = static_cast<std::size_t>(detail::meta_count(m, "coeffs"));
  cfg.hidden = static_cast<std::size_t>(detail::meta_count(m, "hidden"));
  cfg.lr0 = detail::meta_real(m, "lr0");
  cfg.decay = detail::meta_real(m, "decay");
  cfg.decay_every = static_cast<std::size_t>(detail::meta_count(m, "decay_every"));
  cfg.dropout = detail::meta_real(m, "dropout");
  cfg.batch = static_cast<std::size_t>(detail::meta_count(m, "batch"));
  cfg.epochs_itp = static_cast<std::size_t>(detail::meta_count(m, "epochs_itp"));
  cfg.epochs_fp = static_cast<std::size_t>(detail::meta_count(m, "epochs_fp"));
  cfg.lambda = detail::meta_real(m, "lambda");
  cfg.clip_norm = detail::meta_real(m, "clip_norm");
  cfg.seed = detail::meta_count(m, "seed");
  try {
    cfg.metric = parse_metric(detail::meta_get(m, "metric"));
  } catch (const ConfigError& e) {
    throw CheckpointError(e.what());
  }
  cfg.itp_skip_obs = detail::meta_real(m, "itp_skip_obs");
  cfg.itp_skip_priv = detail::meta_real(m, "itp_skip_priv");
  cfg.warm_start_fp = detail::meta_get(m, "warm_start_fp") == "1";
  try {
    validate_train_config(cfg);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint metadata invalid: ") +
                          e.what());
  }
  return cfg;
}

inline void save_stage(const StageArtifacts& art, const TrainConfig& cfg,
                       std::size_t k, const std::filesystem::path& path,
                       MetaMap extra = {}) {
  MetaMap meta = stage_meta(cfg, art.stage, k);
  for (auto& [key, value] : extra) meta[key] = std::move(value);
  save_checkpoint(art.params, meta, path);
}

struct LoadedStage {
  ParamStore params;
  TrainConfig cfg;
  Stage stage = Stage::kItp;
  std::size_t k = 0;
  MetaMap meta;
};

/// Loads a checkpoint and verifies that its tensors form the network the
/// metadata announces.
inline LoadedStage load_stage(const std::filesystem::path& path) {
  Checkpoint ck = load_checkpoint(path);
  LoadedStage out;
  out.cfg = config_from_meta(ck.meta);
  out.stage = parse_stage(detail::meta_get(ck.meta, "stage"));
  out.k = k_from_meta(ck.meta);
  out.params = std::move(ck.params);
  out.meta = std::move(ck.meta);
  const NetworkConfig net = out.cfg.network(out.k);
  switch (out.stage) {
    case Stage::kItp: validate_itp_store(out.params, net); break;
    case Stage::kFp:
    case Stage::kTp: validate_fp_store(out.params, net); break;
    case Stage::kPsl: validate_psl_store(out.params, net); break;
  }
  return out;
}

/// Per-epoch loss curve as deterministic CSV.
inline std::string serialize_loss_curve(const StageArtifacts& art) {
  std::string out = "epoch,itp,fp,simu,total\n";
  for (std::size_t e = 0; e < art.loss_curve.size(); ++e) {
    const LossBreakdown& lb = art.loss_curve[e];
    out += std::to_string(e);
    out += ',';
    out += detail::fmt17(lb.itp);
    out += ',';
    out += detail::fmt17(lb.fp);
    out += ',';
    out += detail::fmt17(lb.simu);
    out += ',';
    out += detail::fmt17(lb.total);
    out += '\n';
  }
  return out;
}

}  // namespace privmotion
