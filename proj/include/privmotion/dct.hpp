// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>

#include "privmotion/errors.hpp"
#include "privmotion/mat.hpp"

namespace privmotion {

/// Orthonormal DCT-II basis along the temporal axis.
///
/// Row c of the basis is the c-th DCT-II basis vector over L samples, scaled
/// so that basis * basis^T = I. Keeping the first C rows of the full basis
/// truncates high frequencies; C = L is lossless. Immutable after
/// construction and safe to share across threads.
class DctBasis {
 public:
  DctBasis(std::size_t length, std::size_t coeff_count)
      : length_(length), coeff_count_(coeff_count) {
    if (length == 0) throw ConfigError("DctBasis: length must be positive");
    if (coeff_count == 0 || coeff_count > length) {
      throw ConfigError("DctBasis: coefficient count must be in [1, " +
                        std::to_string(length) + "], got " +
                        std::to_string(coeff_count));
    }
    basis_ = Mat(coeff_count, length);
    const double l = static_cast<double>(length);
    for (std::size_t c = 0; c < coeff_count; ++c) {
      const double s = (c == 0) ? std::sqrt(1.0 / l) : std::sqrt(2.0 / l);
      for (std::size_t t = 0; t < length; ++t) {
        basis_(c, t) = s * std::cos(std::numbers::pi * (2.0 * t + 1.0) *
                                    static_cast<double>(c) / (2.0 * l));
      }
    }
    basis_t_ = transposed(basis_);
  }

  std::size_t length() const noexcept { return length_; }
  std::size_t coeff_count() const noexcept { return coeff_count_; }

  /// C x L matrix of basis rows (multiply coefficients by this to decode).
  const Mat& basis() const noexcept { return basis_; }
  /// L x C transpose (multiply a sequence by this to encode).
  const Mat& basis_t() const noexcept { return basis_t_; }

 private:
  std::size_t length_;
  std::size_t coeff_count_;
  Mat basis_;
  Mat basis_t_;
};

/// Projects each parameter row of a K x L sequence onto the first C DCT-II
/// basis rows, giving the K x C coefficient matrix.
inline Mat dct_encode(const Mat& seq, const DctBasis& basis) {
  if (seq.cols() != basis.length()) {
    throw DimensionError("dct_encode: sequence has " +
                         std::to_string(seq.cols()) + " frames, basis expects " +
                         std::to_string(basis.length()));
  }
  return matmul(seq, basis.basis_t());
}

/// Reconstructs a K x L sequence from K x C coefficients; exact inverse of
/// dct_encode when C = L.
inline Mat idct_decode(const Mat& freq, const DctBasis& basis) {
  if (freq.cols() != basis.coeff_count()) {
    throw DimensionError("idct_decode: " + std::to_string(freq.cols()) +
                         " coefficients, basis has " +
                         std::to_string(basis.coeff_count()));
  }
  return matmul(freq, basis.basis());
}

}  // namespace privmotion
