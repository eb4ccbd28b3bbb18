// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "privmotion/errors.hpp"
#include "privmotion/graph.hpp"

namespace privmotion {

/// mp scores 3D joint positions (per-joint Euclidean error), ma scores raw
/// angle parameters (absolute error, no wrap-around handling).
enum class Metric { kMp, kMa };

inline const char* metric_name(Metric m) {
  return m == Metric::kMp ? "mp" : "ma";
}

inline Metric parse_metric(const std::string& s) {
  if (s == "mp") return Metric::kMp;
  if (s == "ma") return Metric::kMa;
  throw ConfigError("metric must be 'mp' or 'ma', got '" + s + "'");
}

struct LossBreakdown {
  double itp = 0.0;
  double fp = 0.0;
  double simu = 0.0;
  double total = 0.0;
  Metric metric = Metric::kMp;
  double lambda = 0.0;
};

namespace detail {

inline void require_mp_rows(std::size_t k) {
  if (k % 3 != 0) {
    throw ContractError("mpjpe: K=" + std::to_string(k) +
                        " is not divisible by 3");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Graph builders (training path). `pred` and `gt` are pose-space K x F nodes;
// ground truth is normally a constant node.
// ---------------------------------------------------------------------------

/// Mean pose error over all F frames given. mp: mean over F*J per-joint
/// Euclidean distances; ma: mean over F*K absolute differences.
inline NodeId pose_error_node(Graph& g, NodeId pred, NodeId gt, Metric metric) {
  const Mat& pv = g.value(pred);
  if (!pv.same_shape(g.value(gt))) {
    throw DimensionError("pose error: pred " + pv.shape_str() + " vs gt " +
                         g.value(gt).shape_str());
  }
  const std::size_t k = pv.rows();
  const std::size_t frames = pv.cols();
  const NodeId diff = g.sub(pred, gt);
  if (metric == Metric::kMp) {
    detail::require_mp_rows(k);
    const std::size_t joints = k / 3;
    // Transpose to frame-major, then fold each frame's K entries into J rows
    // of 3: one row per (frame, joint).
    const NodeId rows = g.reshape(g.transpose(diff), frames * joints, 3);
    const NodeId dists = g.reduce_l2_rows(rows);
    // l1-sum of nonnegative distances is a plain sum, subgradients included.
    const NodeId sum = g.reduce_l1_sum(dists);
    return g.scale(1.0 / static_cast<double>(frames * joints), sum);
  }
  const NodeId sum = g.reduce_l1_sum(diff);
  return g.scale(1.0 / static_cast<double>(frames * k), sum);
}

/// Interpolation loss: scored over the full padded span, shapes must match.
inline NodeId loss_itp_node(Graph& g, NodeId pred, NodeId gt, Metric metric) {
  return pose_error_node(g, pred, gt, metric);
}

/// Prediction loss: pred's trailing columns beyond gt's width carry the
/// privileged span and are not scored; pred is truncated to gt's width.
inline NodeId loss_fp_node(Graph& g, NodeId pred, NodeId gt, Metric metric) {
  const Mat& pv = g.value(pred);
  const Mat& gv = g.value(gt);
  if (pv.rows() != gv.rows() || pv.cols() < gv.cols()) {
    throw DimensionError("prediction loss: pred " + pv.shape_str() +
                         " cannot be scored against gt " + gv.shape_str());
  }
  const NodeId scored =
      pv.cols() == gv.cols() ? pred : g.slice_cols(pred, 0, gv.cols());
  return pose_error_node(g, scored, gt, metric);
}

/// Simulation loss ||S - E||_F. Pass E as a constant node: the target is
/// frozen, so no gradient may reach the network that produced it.
inline NodeId loss_simu_node(Graph& g, NodeId s, NodeId e) {
  if (!g.value(s).same_shape(g.value(e))) {
    throw DimensionError("simulation loss: S " + g.value(s).shape_str() +
                         " vs E " + g.value(e).shape_str());
  }
  return g.reduce_frobenius(g.sub(s, e));
}

/// total = fp + lambda * simu. Callers drop the simu branch entirely when
/// lambda is zero; see the trainer.
inline NodeId loss_total_node(Graph& g, NodeId fp, NodeId simu, double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  return g.affine(1.0, fp, lambda, simu);
}

// ---------------------------------------------------------------------------
// Scalar forms (evaluation path and loss curves).
// ---------------------------------------------------------------------------

namespace detail {

/// Mean error over the first `frames` columns of both matrices.
inline double pose_error_cols(const Mat& pred, const Mat& gt,
                              std::size_t frames, Metric metric) {
  const std::size_t k = pred.rows();
  double acc = 0.0;
  if (metric == Metric::kMp) {
    require_mp_rows(k);
    const std::size_t joints = k / 3;
    for (std::size_t f = 0; f < frames; ++f) {
      for (std::size_t j = 0; j < joints; ++j) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
          const double d = pred(3 * j + c, f) - gt(3 * j + c, f);
          d2 += d * d;
        }
        acc += std::sqrt(d2);
      }
    }
    return acc / static_cast<double>(frames * joints);
  }
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t r = 0; r < k; ++r) {
      acc += std::abs(pred(r, f) - gt(r, f));
    }
  }
  return acc / static_cast<double>(frames * k);
}

}  // namespace detail

inline double loss_itp(const Mat& pred, const Mat& gt, Metric metric) {
  if (!pred.same_shape(gt)) {
    throw DimensionError("loss_itp: pred " + pred.shape_str() + " vs gt " +
                         gt.shape_str());
  }
  return detail::pose_error_cols(pred, gt, gt.cols(), metric);
}

inline double loss_fp(const Mat& pred, const Mat& gt, Metric metric) {
  if (pred.rows() != gt.rows() || pred.cols() < gt.cols()) {
    throw DimensionError("loss_fp: pred " + pred.shape_str() +
                         " cannot be scored against gt " + gt.shape_str());
  }
  return detail::pose_error_cols(pred, gt, gt.cols(), metric);
}

inline double loss_simu(const Mat& s, const Mat& e) {
  if (!s.same_shape(e)) {
    throw DimensionError("loss_simu: S " + s.shape_str() + " vs E " +
                         e.shape_str());
  }
  return frobenius_norm(affine(1.0, s, -1.0, e));
}

inline double loss_total(double fp, double simu, double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  return fp + lambda * simu;
}

}  // namespace privmotion
