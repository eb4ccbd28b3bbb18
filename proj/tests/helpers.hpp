// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared test utilities. Oracles here are deliberately written as plain
// index loops, independent of the library kernels they check.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

#include "privmotion/mat.hpp"
#include "privmotion/rng.hpp"

namespace th {

using privmotion::Mat;
using privmotion::Rng;

inline Mat rand_mat(std::size_t rows, std::size_t cols, Rng& rng,
                    double lo = -1.0, double hi = 1.0) {
  Mat m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

// Schoolbook i-j-k product (different accumulation order than the library).
inline Mat matmul_oracle(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

// Central finite differences of a scalar function at x.
inline Mat fd_grad(const std::function<double(const Mat&)>& f, const Mat& x,
                   double h = 1e-5) {
  Mat g(x.rows(), x.cols());
  Mat probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    probe.data()[i] = v + h;
    const double hi = f(probe);
    probe.data()[i] = v - h;
    const double lo = f(probe);
    probe.data()[i] = v;
    g.data()[i] = (hi - lo) / (2.0 * h);
  }
  return g;
}

// Worst |a - f| / max(|a|, |f|) over all entries, with an absolute floor so
// near-zero gradients do not divide by noise.
inline double worst_rel_err(const Mat& analytic, const Mat& fd,
                            double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i];
    const double f = fd.data()[i];
    const double diff = std::abs(a - f);
    if (diff <= floor) continue;
    const double rel = diff / std::max(std::abs(a), std::abs(f));
    if (rel > worst) worst = rel;
  }
  return worst;
}

}  // namespace th
