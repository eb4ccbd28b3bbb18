// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iostream>
#include <vector>

#include "privmotion/errors.hpp"
#include "privmotion/mat.hpp"

namespace privmotion {

/// One training sample cut from a single recording: N observed poses, T poses
/// to predict and P privileged poses after them, all consecutive frames.
/// Each pose is a K-vector (one column).
struct MotionWindow {
  Mat observed;    // K x N
  Mat target;      // K x T
  Mat privileged;  // K x P (zero columns when P = 0)
  double frame_ms = 40.0;

  std::size_t k() const noexcept { return observed.rows(); }
  std::size_t n() const noexcept { return observed.cols(); }
  std::size_t t() const noexcept { return target.cols(); }
  std::size_t p() const noexcept { return privileged.cols(); }
  std::size_t total() const noexcept { return n() + t() + p(); }
};

namespace detail {
inline void copy_cols(Mat& dst, std::size_t at, const Mat& src) {
  for (std::size_t r = 0; r < src.rows(); ++r) {
    for (std::size_t c = 0; c < src.cols(); ++c) dst(r, at + c) = src(r, c);
  }
}
}  // namespace detail

/// The observed sequence padded to length N+T+P by replicating its last pose
/// T+P times.
inline Mat pad_observed(const MotionWindow& w) {
  if (w.n() == 0) throw ContractError("pad_observed: window has no observed poses");
  Mat out(w.k(), w.total());
  detail::copy_cols(out, 0, w.observed);
  for (std::size_t c = w.n(); c < w.total(); ++c) {
    for (std::size_t r = 0; r < w.k(); ++r) out(r, c) = w.observed(r, w.n() - 1);
  }
  return out;
}

/// The privileged sequence padded to length N+T+P by replicating its first
/// pose N+T times in front.
inline Mat pad_privileged(const MotionWindow& w) {
  if (w.p() == 0) {
    throw ContractError("pad_privileged: window has no privileged poses");
  }
  Mat out(w.k(), w.total());
  for (std::size_t c = 0; c < w.n() + w.t(); ++c) {
    for (std::size_t r = 0; r < w.k(); ++r) out(r, c) = w.privileged(r, 0);
  }
  detail::copy_cols(out, w.n() + w.t(), w.privileged);
  return out;
}

/// Ground truth over the whole window: observed | target | privileged.
inline Mat full_sequence(const MotionWindow& w) {
  Mat out(w.k(), w.total());
  detail::copy_cols(out, 0, w.observed);
  detail::copy_cols(out, w.n(), w.target);
  detail::copy_cols(out, w.n() + w.t(), w.privileged);
  return out;
}

/// Ground truth over the scored prediction region: observed | target.
inline Mat observed_target(const MotionWindow& w) {
  Mat out(w.k(), w.n() + w.t());
  detail::copy_cols(out, 0, w.observed);
  detail::copy_cols(out, w.n(), w.target);
  return out;
}

/// Cuts a K x L recording into windows at offsets 0, stride, 2*stride, ...
/// while a full N+T+P window fits. A too-short recording yields an empty list
/// (with a warning on stderr), not an error.
inline std::vector<MotionWindow> make_window_samples(const Mat& recording,
                                                     std::size_t n, std::size_t t,
                                                     std::size_t p, std::size_t stride,
                                                     double frame_ms = 40.0) {
  if (n == 0 || t == 0) {
    throw ConfigError("make_window_samples: N and T must be positive");
  }
  if (stride == 0) throw ConfigError("make_window_samples: stride must be positive");
  const std::size_t len = n + t + p;
  std::vector<MotionWindow> out;
  if (recording.cols() < len) {
    std::cerr << "warning: recording with " << recording.cols()
              << " frames is shorter than one " << n << "-" << t << "-" << p
              << " window; skipped\n";
    return out;
  }
  for (std::size_t off = 0; off + len <= recording.cols(); off += stride) {
    MotionWindow w;
    w.frame_ms = frame_ms;
    w.observed = Mat(recording.rows(), n);
    w.target = Mat(recording.rows(), t);
    w.privileged = Mat(recording.rows(), p);
    for (std::size_t r = 0; r < recording.rows(); ++r) {
      for (std::size_t c = 0; c < n; ++c) w.observed(r, c) = recording(r, off + c);
      for (std::size_t c = 0; c < t; ++c) w.target(r, c) = recording(r, off + n + c);
      for (std::size_t c = 0; c < p; ++c) {
        w.privileged(r, c) = recording(r, off + n + t + c);
      }
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace privmotion
