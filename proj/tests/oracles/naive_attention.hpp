// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.
//
// Scalar-loop transformer pieces used as the independent oracle for the
// encoder module. Plain nested vectors, explicit per-head slicing, no
// Eigen expressions.

#pragma once

#include <vector>

#include "refdic/encoder.hpp"

namespace refdic::testing {

using Mat = std::vector<std::vector<double>>;

struct NaiveBlock {
  Mat wq, wk, wv, wo, w1, w2;
  std::vector<double> b1, b2;
  std::vector<double> ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;
};

NaiveBlock to_naive(const BlockParams<double>& params);
Mat to_naive(const Matrix<double>& m);
Matrix<double> from_naive(const Mat& m);

Mat naive_multi_head(const Mat& q_in, const Mat& kv_in, const NaiveBlock& p,
                     int heads);
Mat naive_layer_norm(const Mat& x, const std::vector<double>& gamma,
                     const std::vector<double>& beta);
Mat naive_ffn(const Mat& x, const NaiveBlock& p);

// Full block: LN(x + MH) then LN(h + FFN(h)).
Mat naive_attention_block(const Mat& x, const NaiveBlock& p, int heads);

Mat naive_fuse_layer(const Mat& u, const NaiveBlock& p, int heads, bool full);
Mat naive_select_layer(const Mat& v, const Mat& u, const NaiveBlock& p,
                       int heads, bool full);

double max_abs_diff(const Mat& a, const Mat& b);
double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b);

}  // namespace refdic::testing
