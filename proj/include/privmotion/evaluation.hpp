// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "privmotion/dataset.hpp"
#include "privmotion/trainer.hpp"

namespace privmotion {

inline constexpr int kDefaultTestpoints[] = {80, 160, 320, 400, 560, 1000};

inline const char* error_column(Metric m) {
  return m == Metric::kMp ? "error_mm" : "error_rad";
}

inline const char* delta_column(Metric m) {
  return m == Metric::kMp ? "delta_mm" : "delta_rad";
}

/// Frame f's error: mean over joints of the Euclidean error (mp) or mean
/// over the K parameters of the absolute error (ma). No cross-frame
/// averaging.
inline std::vector<double> error_at_frames(const Mat& pred, const Mat& gt,
                                           Metric metric) {
  if (!pred.same_shape(gt)) {
    throw DimensionError("error_at_frames: pred " + pred.shape_str() +
                         " vs gt " + gt.shape_str());
  }
  const std::size_t k = pred.rows();
  std::vector<double> out(pred.cols());
  for (std::size_t f = 0; f < pred.cols(); ++f) {
    double acc = 0.0;
    if (metric == Metric::kMp) {
      detail::require_mp_rows(k);
      for (std::size_t j = 0; j < k / 3; ++j) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
          const double d = pred(3 * j + c, f) - gt(3 * j + c, f);
          d2 += d * d;
        }
        acc += std::sqrt(d2);
      }
      out[f] = acc / static_cast<double>(k / 3);
    } else {
      for (std::size_t r = 0; r < k; ++r) acc += std::abs(pred(r, f) - gt(r, f));
      out[f] = acc / static_cast<double>(k);
    }
  }
  return out;
}

/// Maps each requested millisecond mark onto a 1-indexed prediction frame:
/// ms/frame_ms must land on a whole frame inside the vector.
inline std::map<int, double> testpoints(const std::vector<double>& pred_errors,
                                        double frame_ms,
                                        const std::vector<int>& ms_list) {
  if (!(frame_ms > 0.0)) throw ConfigError("frame_ms must be positive");
  std::map<int, double> out;
  for (const int ms : ms_list) {
    const double q = static_cast<double>(ms) / frame_ms;
    const long long f = std::llround(q);
    if (std::abs(q - static_cast<double>(f)) > 1e-9) {
      throw ConfigError("testpoint " + std::to_string(ms) +
                        "ms is not a whole frame at " + detail::fmt17(frame_ms) +
                        "ms per frame");
    }
    if (f < 1 || static_cast<std::size_t>(f) > pred_errors.size()) {
      throw ConfigError("testpoint " + std::to_string(ms) +
                        "ms maps to frame " + std::to_string(f) +
                        ", outside the " + std::to_string(pred_errors.size()) +
                        " predicted frames");
    }
    out[ms] = pred_errors[static_cast<std::size_t>(f) - 1];
  }
  return out;
}

/// The classic no-motion predictor: every future frame repeats observed
/// column N.
inline Mat zero_velocity(const MotionWindow& w) {
  if (w.n() == 0) throw ContractError("zero_velocity: no observed frames");
  Mat out(w.k(), w.t());
  for (std::size_t f = 0; f < w.t(); ++f) {
    for (std::size_t r = 0; r < w.k(); ++r) {
      out(r, f) = w.observed(r, w.n() - 1);
    }
  }
  return out;
}

struct EvalReport {
  std::size_t n = 0, t = 0, p = 0;
  Metric metric = Metric::kMp;
  double frame_ms = 40.0;
  // Mean error per frame across windows. Covers the first N+T frames for
  // prediction stages and all N+T+P for the interpolation stage.
  std::vector<double> per_frame;
  std::map<int, double> testpoint_errors;
  std::map<int, double> baseline;  // zero-velocity at the same marks
  std::uint64_t seed = 0;
  std::string stage;
  std::string checkpoint;
};

namespace detail {

inline void mean_accumulate(std::vector<double>& acc,
                            const std::vector<double>& v) {
  if (acc.empty()) acc.assign(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

}  // namespace detail

/// Runs a trained stage over evaluation windows in eval mode and averages the
/// per-frame errors. Prediction frames 1..T feed the testpoint map.
inline EvalReport evaluate_stage(const ParamStore& params, Stage stage,
                                 const TrainConfig& cfg,
                                 const std::vector<MotionWindow>& windows,
                                 const std::vector<int>& ms_list) {
  detail::check_windows(windows, cfg);
  const double frame_ms = windows.front().frame_ms;
  for (const MotionWindow& w : windows) {
    if (w.frame_ms != frame_ms) {
      throw ConfigError("evaluation windows mix frame intervals");
    }
  }

  const std::size_t k = windows.front().k();
  const NetworkConfig net = cfg.network(k);
  const DctBasis basis(cfg.total(), cfg.coeff_count());

  EvalReport rep;
  rep.n = cfg.n;
  rep.t = cfg.t;
  rep.p = cfg.p;
  rep.metric = cfg.metric;
  rep.frame_ms = frame_ms;
  rep.stage = stage_name(stage);

  std::vector<double> err_sum;
  std::vector<double> zv_sum;
  const bool itp_stage = stage == Stage::kItp;

  ItpNet itp_net;
  FpNet fp_net;
  PslNet psl_net;
  switch (stage) {
    case Stage::kItp: itp_net = extract_itp(params); break;
    case Stage::kFp:
    case Stage::kTp: fp_net = extract_fp(params); break;
    case Stage::kPsl: psl_net = extract_psl(params); break;
  }

  for (const MotionWindow& w : windows) {
    const Mat h_obs = dct_encode(pad_observed(w), basis);
    Mat h_out;
    if (itp_stage) {
      const Mat h_priv = dct_encode(pad_privileged(w), basis);
      h_out = itp_eval(itp_net, net, h_obs, h_priv).h_itp;
    } else if (stage == Stage::kPsl) {
      h_out = psl_eval(psl_net, net, h_obs);
    } else {
      h_out = fp_eval(fp_net, net, h_obs).h_fp;
    }
    const Mat pred = idct_decode(h_out, basis);

    if (itp_stage) {
      detail::mean_accumulate(err_sum,
                              error_at_frames(pred, full_sequence(w), cfg.metric));
    } else {
      Mat scored(w.k(), cfg.n + cfg.t);
      for (std::size_t f = 0; f < scored.cols(); ++f) {
        for (std::size_t r = 0; r < w.k(); ++r) scored(r, f) = pred(r, f);
      }
      detail::mean_accumulate(
          err_sum, error_at_frames(scored, observed_target(w), cfg.metric));
    }
    detail::mean_accumulate(zv_sum,
                            error_at_frames(zero_velocity(w), w.target, cfg.metric));
  }

  const double inv = 1.0 / static_cast<double>(windows.size());
  for (double& v : err_sum) v *= inv;
  for (double& v : zv_sum) v *= inv;
  rep.per_frame = std::move(err_sum);

  const std::vector<double> pred_span(rep.per_frame.begin() + static_cast<long>(cfg.n),
                                      rep.per_frame.begin() +
                                          static_cast<long>(cfg.n + cfg.t));
  rep.testpoint_errors = testpoints(pred_span, frame_ms, ms_list);
  rep.baseline = testpoints(zv_sum, frame_ms, ms_list);
  return rep;
}

/// Parameter-free report: the zero-velocity errors fill both the main and the
/// baseline columns. per_frame covers only the T prediction frames (n = 0).
inline EvalReport zero_velocity_report(const TrainConfig& cfg,
                                       const std::vector<MotionWindow>& windows,
                                       const std::vector<int>& ms_list) {
  detail::check_windows(windows, cfg);
  const double frame_ms = windows.front().frame_ms;
  std::vector<double> zv_sum;
  for (const MotionWindow& w : windows) {
    if (w.frame_ms != frame_ms) {
      throw ConfigError("evaluation windows mix frame intervals");
    }
    detail::mean_accumulate(zv_sum,
                            error_at_frames(zero_velocity(w), w.target, cfg.metric));
  }
  for (double& v : zv_sum) v /= static_cast<double>(windows.size());

  EvalReport rep;
  rep.n = 0;
  rep.t = cfg.t;
  rep.p = cfg.p;
  rep.metric = cfg.metric;
  rep.frame_ms = frame_ms;
  rep.per_frame = std::move(zv_sum);
  rep.testpoint_errors = testpoints(rep.per_frame, frame_ms, ms_list);
  rep.baseline = rep.testpoint_errors;
  rep.stage = "zero-velocity";
  rep.seed = cfg.seed;
  return rep;
}

// ---------------------------------------------------------------------------
// Ablation harnesses.
// ---------------------------------------------------------------------------

struct SweepRow {
  std::size_t p = 0;
  EvalReport report;
  std::map<int, double> delta_vs_tp;  // absolute error minus the P=0 row's
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<int> ms_list;
  Metric metric = Metric::kMp;
};

/// Trains and evaluates one full pipeline per privileged length. Every row
/// starts from the same seed; only P (and with it the stage wiring) varies.
/// The P=0 row trains the plain predictor and anchors the deltas.
inline SweepReport pk_length_sweep(const std::vector<Recording>& train_recs,
                                   const std::vector<Recording>& eval_recs,
                                   const TrainConfig& base,
                                   const std::vector<std::size_t>& p_list,
                                   const std::vector<int>& ms_list,
                                   std::size_t train_stride,
                                   std::size_t eval_stride) {
  if (p_list.empty() ||
      std::find(p_list.begin(), p_list.end(), std::size_t{0}) == p_list.end()) {
    throw ConfigError("sweep p_list must include 0 (the plain-prediction row)");
  }
  SweepReport out;
  out.ms_list = ms_list;
  out.metric = base.metric;
  for (const std::size_t p : p_list) {
    TrainConfig cfg = base;
    cfg.p = p;
    const auto train_w = make_dataset(train_recs, cfg.n, cfg.t, cfg.p, train_stride);
    const auto eval_w = make_dataset(eval_recs, cfg.n, cfg.t, cfg.p, eval_stride);
    StageArtifacts art;
    if (p == 0) {
      cfg.lambda = 0.0;
      art = train_fp(train_w, nullptr, cfg, Stage::kTp);
    } else {
      const StageArtifacts itp = train_itp(train_w, cfg);
      art = train_fp(train_w, &itp.params, cfg);
    }
    SweepRow row;
    row.p = p;
    row.report = evaluate_stage(art.params, art.stage, cfg, eval_w, ms_list);
    row.report.seed = cfg.seed;
    out.rows.push_back(std::move(row));
  }
  const SweepRow* tp = nullptr;
  for (const SweepRow& r : out.rows) {
    if (r.p == 0) {
      tp = &r;
      break;
    }
  }
  for (SweepRow& r : out.rows) {
    for (const auto& [ms, err] : r.report.testpoint_errors) {
      r.delta_vs_tp[ms] = err - tp->report.testpoint_errors.at(ms);
    }
  }
  return out;
}

/// Scores the privileged window directly with an extra loss term instead of
/// distilling; the report still covers only the first N+T frames.
inline EvalReport psl_baseline(const std::vector<Recording>& train_recs,
                               const std::vector<Recording>& eval_recs,
                               const TrainConfig& cfg, double psl_weight,
                               const std::vector<int>& ms_list,
                               std::size_t train_stride,
                               std::size_t eval_stride) {
  const auto train_w = make_dataset(train_recs, cfg.n, cfg.t, cfg.p, train_stride);
  const auto eval_w = make_dataset(eval_recs, cfg.n, cfg.t, cfg.p, eval_stride);
  const StageArtifacts art = train_psl(train_w, cfg, psl_weight);
  EvalReport rep = evaluate_stage(art.params, Stage::kPsl, cfg, eval_w, ms_list);
  rep.seed = cfg.seed;
  return rep;
}

// ---------------------------------------------------------------------------
// CSV emission. All files: comma-separated, '.' decimal point, LF endings.
// ---------------------------------------------------------------------------

/// Prediction frames 1..T, one row each: frame,ms,error.
inline std::string report_csv(const EvalReport& r) {
  std::string out = "frame,ms,";
  out += error_column(r.metric);
  out += '\n';
  for (std::size_t f = 1; f <= r.t; ++f) {
    out += std::to_string(f);
    out += ',';
    out += detail::fmt17(static_cast<double>(f) * r.frame_ms);
    out += ',';
    out += detail::fmt17(r.per_frame[r.n + f - 1]);
    out += '\n';
  }
  return out;
}

/// Every recorded frame (observation, prediction, and for the interpolation
/// stage the privileged span), 1-indexed from the window start.
inline std::string curve_csv(const EvalReport& r) {
  std::string out = "frame,ms,";
  out += error_column(r.metric);
  out += '\n';
  for (std::size_t f = 1; f <= r.per_frame.size(); ++f) {
    out += std::to_string(f);
    out += ',';
    out += detail::fmt17(static_cast<double>(f) * r.frame_ms);
    out += ',';
    out += detail::fmt17(r.per_frame[f - 1]);
    out += '\n';
  }
  return out;
}

/// One row per (P, prediction frame); the delta column is measured against
/// the P=0 row.
inline std::string sweep_csv(const SweepReport& s) {
  std::string out = "P,frame,ms,";
  out += error_column(s.metric);
  out += ',';
  out += delta_column(s.metric);
  out += '\n';
  if (s.rows.empty()) return out;
  const SweepRow* tp = nullptr;
  for (const SweepRow& r : s.rows) {
    if (r.p == 0) tp = &r;
  }
  if (tp == nullptr) throw ContractError("sweep report lacks the P=0 row");
  for (const SweepRow& r : s.rows) {
    for (std::size_t f = 1; f <= r.report.t; ++f) {
      const double err = r.report.per_frame[r.report.n + f - 1];
      const double ref = tp->report.per_frame[tp->report.n + f - 1];
      out += std::to_string(r.p);
      out += ',';
      out += std::to_string(f);
      out += ',';
      out += detail::fmt17(static_cast<double>(f) * r.report.frame_ms);
      out += ',';
      out += detail::fmt17(err);
      out += ',';
      out += detail::fmt17(err - ref);
      out += '\n';
    }
  }
  return out;
}

/// Zero-velocity-only report (no parameters involved).
inline std::string baseline_csv(const EvalReport& r) {
  std::string out = "frame,ms,";
  out += error_column(r.metric);
  out += '\n';
  std::vector<std::pair<int, double>> rows(r.baseline.begin(), r.baseline.end());
  for (const auto& [ms, err] : rows) {
    const long long f = std::llround(static_cast<double>(ms) / r.frame_ms);
    out += std::to_string(f);
    out += ',';
    out += std::to_string(ms);
    out += ',';
    out += detail::fmt17(err);
    out += '\n';
  }
  return out;
}

}  // namespace privmotion
