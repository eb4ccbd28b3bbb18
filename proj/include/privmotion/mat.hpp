// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "privmotion/errors.hpp"

namespace privmotion {

/// Dense row-major matrix of 64-bit reals. The only tensor type in the
/// library; vectors are 1-column or 1-row matrices, scalars are 1x1.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Mat m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
      if (r.size() != m.cols_) {
        throw DimensionError("from_rows: ragged row " + std::to_string(i));
      }
      std::size_t j = 0;
      for (double v : r) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  double* row(std::size_t r) noexcept { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const noexcept { return data_.data() + r * cols_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Mat& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  /// Reinterprets the row-major data with new dimensions; size must match.
  Mat reshaped(std::size_t rows, std::size_t cols) const {
    if (rows * cols != size()) {
      throw DimensionError("reshape: " + shape_str() + " has " +
                           std::to_string(size()) + " entries, not " +
                           std::to_string(rows * cols));
    }
    Mat out = *this;
    out.rows_ = rows;
    out.cols_ = cols;
    return out;
  }

  bool operator==(const Mat& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Kernels. Loop orders keep the inner loop contiguous in both operands; dot
// reductions use four accumulators in a fixed order so results stay
// bit-reproducible run to run.
// ---------------------------------------------------------------------------

/// dst += a * b. dst must already have shape a.rows x b.cols.
inline void matmul_acc(Mat& dst, const Mat& a, const Mat& b) {
  const std::size_t n = a.rows(), kk = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row(i);
    double* drow = dst.row(i);
    for (std::size_t k = 0; k < kk; ++k) {
      const double aik = arow[k];
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < m; ++j) drow[j] += aik * brow[j];
    }
  }
}

/// dst += a * b^T (dst: a.rows x b.rows).
inline void matmul_abt_acc(Mat& dst, const Mat& a, const Mat& b) {
  const std::size_t n = a.rows(), m = b.rows(), len = a.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row(i);
    double* drow = dst.row(i);
    for (std::size_t k = 0; k < m; ++k) {
      const double* brow = b.row(k);
      double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
      std::size_t j = 0;
      for (; j + 4 <= len; j += 4) {
        s0 += arow[j] * brow[j];
        s1 += arow[j + 1] * brow[j + 1];
        s2 += arow[j + 2] * brow[j + 2];
        s3 += arow[j + 3] * brow[j + 3];
      }
      double s = (s0 + s1) + (s2 + s3);
      for (; j < len; ++j) s += arow[j] * brow[j];
      drow[k] += s;
    }
  }
}

/// dst += a^T * b (dst: a.cols x b.cols).
inline void matmul_atb_acc(Mat& dst, const Mat& a, const Mat& b) {
  const std::size_t n = a.rows(), kk = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row(i);
    const double* brow = b.row(i);
    for (std::size_t k = 0; k < kk; ++k) {
      const double aik = arow[k];
      double* drow = dst.row(k);
      for (std::size_t j = 0; j < m; ++j) drow[j] += aik * brow[j];
    }
  }
}

inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + a.shape_str() + " by " +
                         b.shape_str());
  }
  Mat dst(a.rows(), b.cols());
  matmul_acc(dst, a, b);
  return dst;
}

inline Mat transposed(const Mat& m) {
  Mat out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  }
  return out;
}

/// y += alpha * x.
inline void axpy(double alpha, const Mat& x, Mat& y) {
  if (!x.same_shape(y)) {
    throw DimensionError("axpy: shapes differ: " + x.shape_str() + " vs " +
                         y.shape_str());
  }
  const double* xs = x.data();
  double* ys = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) ys[i] += alpha * xs[i];
}

/// alpha*x + beta*y elementwise.
inline Mat affine(double alpha, const Mat& x, double beta, const Mat& y) {
  if (!x.same_shape(y)) {
    throw DimensionError("affine: shapes differ: " + x.shape_str() + " vs " +
                         y.shape_str());
  }
  Mat out(x.rows(), x.cols());
  const double* xs = x.data();
  const double* ys = y.data();
  double* os = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) os[i] = alpha * xs[i] + beta * ys[i];
  return out;
}

inline double frobenius_norm(const Mat& m) {
  double s = 0;
  const double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

inline bool all_finite(const Mat& m) {
  const double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("max_abs_diff: shapes differ: " + a.shape_str() +
                         " vs " + b.shape_str());
  }
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  }
  return d;
}

}  // namespace privmotion
