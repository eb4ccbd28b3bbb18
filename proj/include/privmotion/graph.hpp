// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "privmotion/errors.hpp"
#include "privmotion/mat.hpp"
#include "privmotion/rng.hpp"

namespace privmotion {

using NodeId = std::uint32_t;

/// Gradient of a scalar loss with respect to every named leaf, keyed by
/// parameter name (sorted, so iteration order is deterministic).
using GradMap = std::map<std::string, Mat>;

/// Recorded forward computation with reverse-mode gradient extraction.
///
/// Nodes are appended in execution order, which is therefore a topological
/// order: every input id precedes its consumers. backward() walks the tape in
/// reverse from the loss node and accumulates gradients of identical shape for
/// every node on the path. A graph is single-threaded during a forward or
/// backward pass.
class Graph {
 public:
  enum class Op : std::uint8_t {
    kLeaf,       // named parameter
    kConstant,   // data; no gradient is propagated past it
    kMatMul,
    kAffine,     // ca*x + cb*y
    kScale,      // ca*x
    kTanh,
    kDropout,    // inverted scaling; mask recorded for backward
    kTranspose,
    kReshape,
    kSliceCols,
    kL2Rows,     // sum of row 2-norms; rows must be 3-wide
    kL1Sum,
    kFrobenius,
  };

  /// Named parameter leaf. The value is copied in; gradients come back out of
  /// backward() under this name.
  NodeId leaf(std::string name, Mat value) {
    Node n;
    n.op = Op::kLeaf;
    n.name = std::move(name);
    n.value = std::move(value);
    return push(std::move(n));
  }

  /// Constant input: participates in forward math, receives no gradient.
  NodeId constant(Mat value) {
    Node n;
    n.op = Op::kConstant;
    n.value = std::move(value);
    return push(std::move(n));
  }

  NodeId matmul(NodeId a, NodeId b) {
    const Mat& x = value(a);
    const Mat& y = value(b);
    if (x.cols() != y.rows()) {
      throw DimensionError("matmul: cannot multiply " + x.shape_str() + " by " +
                           y.shape_str());
    }
    Node n;
    n.op = Op::kMatMul;
    n.in = {a, b};
    n.value = Mat(x.rows(), y.cols());
    matmul_acc(n.value, x, y);
    return push(std::move(n));
  }

  /// alpha*x + beta*y, elementwise; shapes must match.
  NodeId affine(double alpha, NodeId x, double beta, NodeId y) {
    const Mat& xv = value(x);
    const Mat& yv = value(y);
    if (!xv.same_shape(yv)) {
      throw DimensionError("affine: shapes differ: " + xv.shape_str() + " vs " +
                           yv.shape_str());
    }
    Node n;
    n.op = Op::kAffine;
    n.in = {x, y};
    n.ca = alpha;
    n.cb = beta;
    n.value = privmotion::affine(alpha, xv, beta, yv);
    return push(std::move(n));
  }

  NodeId add(NodeId x, NodeId y) { return affine(1.0, x, 1.0, y); }
  NodeId sub(NodeId x, NodeId y) { return affine(1.0, x, -1.0, y); }

  NodeId scale(double alpha, NodeId x) {
    Node n;
    n.op = Op::kScale;
    n.in = {x, kNone};
    n.ca = alpha;
    const Mat& xv = value(x);
    n.value = Mat(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < xv.size(); ++i) n.value.data()[i] = alpha * xv.data()[i];
    return push(std::move(n));
  }

  NodeId tanh_act(NodeId x) {
    Node n;
    n.op = Op::kTanh;
    n.in = {x, kNone};
    const Mat& xv = value(x);
    n.value = Mat(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < xv.size(); ++i) {
      n.value.data()[i] = std::tanh(xv.data()[i]);
    }
    return push(std::move(n));
  }

  /// Inverted dropout: zeroes entries with probability `rate` and scales
  /// survivors by 1/(1-rate) while training; identity in eval mode (and for
  /// rate 0, which consumes no random draws).
  NodeId dropout(NodeId x, double rate, bool training, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) {
      throw ConfigError("dropout: rate must be in [0,1), got " +
                        std::to_string(rate));
    }
    if (!training || rate == 0.0) return x;
    Node n;
    n.op = Op::kDropout;
    n.in = {x, kNone};
    n.ca = 1.0 / (1.0 - rate);
    const Mat& xv = value(x);
    n.value = Mat(xv.rows(), xv.cols());
    n.mask.resize(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const bool keep = !rng.bernoulli(rate);
      n.mask[i] = keep;
      n.value.data()[i] = keep ? xv.data()[i] * n.ca : 0.0;
    }
    return push(std::move(n));
  }

  NodeId transpose(NodeId x) {
    Node n;
    n.op = Op::kTranspose;
    n.in = {x, kNone};
    n.value = transposed(value(x));
    return push(std::move(n));
  }

  NodeId reshape(NodeId x, std::size_t rows, std::size_t cols) {
    Node n;
    n.op = Op::kReshape;
    n.in = {x, kNone};
    n.value = value(x).reshaped(rows, cols);
    return push(std::move(n));
  }

  /// Columns [begin, begin+count) of x; backward scatters into that range.
  NodeId slice_cols(NodeId x, std::size_t begin, std::size_t count) {
    const Mat& xv = value(x);
    if (begin + count > xv.cols()) {
      throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " +
                           std::to_string(begin + count) + ") out of " +
                           xv.shape_str());
    }
    Node n;
    n.op = Op::kSliceCols;
    n.in = {x, kNone};
    n.i0 = begin;
    n.i1 = count;
    n.value = Mat(xv.rows(), count);
    for (std::size_t r = 0; r < xv.rows(); ++r) {
      for (std::size_t c = 0; c < count; ++c) n.value(r, c) = xv(r, begin + c);
    }
    return push(std::move(n));
  }

  /// Sum of Euclidean norms of the rows; rows must be 3-vectors.
  /// Subgradient at an all-zero row is 0.
  NodeId reduce_l2_rows(NodeId x) {
    const Mat& xv = value(x);
    if (xv.cols() != 3) {
      throw DimensionError("reduce_l2_rows: rows must be 3-vectors, got " +
                           xv.shape_str());
    }
    Node n;
    n.op = Op::kL2Rows;
    n.in = {x, kNone};
    double s = 0;
    for (std::size_t r = 0; r < xv.rows(); ++r) {
      const double* p = xv.row(r);
      s += std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    }
    n.value = Mat(1, 1, s);
    return push(std::move(n));
  }

  /// Sum of absolute values; subgradient at 0 is 0.
  NodeId reduce_l1_sum(NodeId x) {
    Node n;
    n.op = Op::kL1Sum;
    n.in = {x, kNone};
    const Mat& xv = value(x);
    double s = 0;
    for (std::size_t i = 0; i < xv.size(); ++i) s += std::abs(xv.data()[i]);
    n.value = Mat(1, 1, s);
    return push(std::move(n));
  }

  /// Frobenius norm; gradient at the zero matrix is defined as 0.
  NodeId reduce_frobenius(NodeId x) {
    Node n;
    n.op = Op::kFrobenius;
    n.in = {x, kNone};
    n.value = Mat(1, 1, frobenius_norm(value(x)));
    return push(std::move(n));
  }

  const Mat& value(NodeId id) const { return nodes_[id].value; }
  double scalar(NodeId id) const { return nodes_[id].value(0, 0); }

  /// Gradient accumulated at a node by the latest backward() (empty if the
  /// node was not reached).
  const Mat& grad(NodeId id) const { return nodes_[id].grad; }

  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Reverse-topological accumulation from a scalar loss node. Returns
  /// d(loss)/d(p) for every named leaf in the graph; leaves not reached by the
  /// sweep get a zero gradient of matching shape. Repeated calls on an
  /// unchanged graph return identical results.
  GradMap backward(NodeId loss) {
    const Mat& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) {
      throw ContractError("backward: loss must be a 1x1 scalar, got " +
                          lv.shape_str());
    }
    for (Node& n : nodes_) n.grad = Mat();
    nodes_[loss].grad = Mat(1, 1, 1.0);

    for (std::uint32_t id = loss + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (n.grad.empty()) continue;
      propagate(n);
    }

    GradMap out;
    for (const Node& n : nodes_) {
      if (n.op != Op::kLeaf) continue;
      if (n.grad.empty()) {
        out[n.name] = Mat(n.value.rows(), n.value.cols());
      } else {
        out[n.name] = n.grad;
      }
    }
    return out;
  }

 private:
  static constexpr NodeId kNone = 0xffffffffu;

  struct Node {
    Op op = Op::kConstant;
    std::array<NodeId, 2> in = {kNone, kNone};
    double ca = 0.0;
    double cb = 0.0;
    std::size_t i0 = 0;
    std::size_t i1 = 0;
    std::string name;
    std::vector<std::uint8_t> mask;
    Mat value;
    Mat grad;
  };

  NodeId push(Node&& n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  /// Gradient buffer of an input node, allocated on first touch. Constants
  /// never consume a gradient, so accumulation into them is skipped.
  Mat* grad_of(NodeId id) {
    Node& n = nodes_[id];
    if (n.op == Op::kConstant) return nullptr;
    if (n.grad.empty()) n.grad = Mat(n.value.rows(), n.value.cols());
    return &n.grad;
  }

  void propagate(Node& n) {
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConstant:
        break;
      case Op::kMatMul: {
        const Mat& a = nodes_[n.in[0]].value;
        const Mat& b = nodes_[n.in[1]].value;
        if (Mat* ga = grad_of(n.in[0])) matmul_abt_acc(*ga, g, b);
        if (Mat* gb = grad_of(n.in[1])) matmul_atb_acc(*gb, a, g);
        break;
      }
      case Op::kAffine:
        if (Mat* gx = grad_of(n.in[0])) axpy(n.ca, g, *gx);
        if (Mat* gy = grad_of(n.in[1])) axpy(n.cb, g, *gy);
        break;
      case Op::kScale:
        if (Mat* gx = grad_of(n.in[0])) axpy(n.ca, g, *gx);
        break;
      case Op::kTanh:
        if (Mat* gx = grad_of(n.in[0])) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double t = n.value.data()[i];
            gx->data()[i] += g.data()[i] * (1.0 - t * t);
          }
        }
        break;
      case Op::kDropout:
        if (Mat* gx = grad_of(n.in[0])) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            if (n.mask[i]) gx->data()[i] += g.data()[i] * n.ca;
          }
        }
        break;
      case Op::kTranspose:
        if (Mat* gx = grad_of(n.in[0])) {
          for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t c = 0; c < g.cols(); ++c) (*gx)(c, r) += g(r, c);
          }
        }
        break;
      case Op::kReshape:
        if (Mat* gx = grad_of(n.in[0])) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            gx->data()[i] += g.data()[i];
          }
        }
        break;
      case Op::kSliceCols:
        if (Mat* gx = grad_of(n.in[0])) {
          for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t c = 0; c < g.cols(); ++c) {
              (*gx)(r, n.i0 + c) += g(r, c);
            }
          }
        }
        break;
      case Op::kL2Rows:
        if (Mat* gx = grad_of(n.in[0])) {
          const Mat& x = nodes_[n.in[0]].value;
          const double gs = g(0, 0);
          for (std::size_t r = 0; r < x.rows(); ++r) {
            const double* p = x.row(r);
            const double nrm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            if (nrm == 0.0) continue;
            double* gp = gx->row(r);
            for (int j = 0; j < 3; ++j) gp[j] += gs * p[j] / nrm;
          }
        }
        break;
      case Op::kL1Sum:
        if (Mat* gx = grad_of(n.in[0])) {
          const Mat& x = nodes_[n.in[0]].value;
          const double gs = g(0, 0);
          for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = x.data()[i];
            if (v > 0.0) {
              gx->data()[i] += gs;
            } else if (v < 0.0) {
              gx->data()[i] -= gs;
            }
          }
        }
        break;
      case Op::kFrobenius:
        if (Mat* gx = grad_of(n.in[0])) {
          const double nrm = n.value(0, 0);
          if (nrm == 0.0) break;
          const Mat& x = nodes_[n.in[0]].value;
          const double gs = g(0, 0) / nrm;
          for (std::size_t i = 0; i < x.size(); ++i) {
            gx->data()[i] += gs * x.data()[i];
          }
        }
        break;
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace privmotion
