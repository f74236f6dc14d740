// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "naive_attention.hpp"

#include <cmath>

namespace refdic::testing {

namespace {

Mat zeros(std::size_t rows, std::size_t cols) {
  return Mat(rows, std::vector<double>(cols, 0.0));
}

Mat matmul(const Mat& a, const Mat& b) {
  Mat out = zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t j = 0; j < b[0].size(); ++j) {
        out[i][j] += a[i][k] * b[k][j];
      }
    }
  }
  return out;
}

Mat add(const Mat& a, const Mat& b) {
  Mat out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[0].size(); ++j) out[i][j] += b[i][j];
  }
  return out;
}

std::vector<double> to_vec(const Vector<double>& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[static_cast<std::size_t>(i)] = v(i);
  }
  return out;
}

}  // namespace

Mat to_naive(const Matrix<double>& m) {
  Mat out = zeros(static_cast<std::size_t>(m.rows()),
                  static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    }
  }
  return out;
}

Matrix<double> from_naive(const Mat& m) {
  Matrix<double> out(static_cast<Eigen::Index>(m.size()),
                     static_cast<Eigen::Index>(m[0].size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[0].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
    }
  }
  return out;
}

NaiveBlock to_naive(const BlockParams<double>& params) {
  NaiveBlock b;
  b.wq = to_naive(params.wq);
  b.wk = to_naive(params.wk);
  b.wv = to_naive(params.wv);
  b.wo = to_naive(params.wo);
  b.w1 = to_naive(params.w1);
  b.w2 = to_naive(params.w2);
  b.b1 = to_vec(params.b1);
  b.b2 = to_vec(params.b2);
  b.ln1_gamma = to_vec(params.ln1_gamma);
  b.ln1_beta = to_vec(params.ln1_beta);
  b.ln2_gamma = to_vec(params.ln2_gamma);
  b.ln2_beta = to_vec(params.ln2_beta);
  return b;
}

Mat naive_multi_head(const Mat& q_in, const Mat& kv_in, const NaiveBlock& p,
                     int heads) {
  const std::size_t d = p.wq.size();
  const std::size_t dk = d / static_cast<std::size_t>(heads);
  const std::size_t nq = q_in.size();
  const std::size_t nk = kv_in.size();
  Mat q = matmul(q_in, p.wq);
  Mat k = matmul(kv_in, p.wk);
  Mat v = matmul(kv_in, p.wv);
  Mat concat = zeros(nq, d);
  for (int head = 0; head < heads; ++head) {
    const std::size_t off = static_cast<std::size_t>(head) * dk;
    for (std::size_t i = 0; i < nq; ++i) {
      // logits for this query row
      std::vector<double> logits(nk, 0.0);
      for (std::size_t j = 0; j < nk; ++j) {
        double dot = 0;
        for (std::size_t c = 0; c < dk; ++c) dot += q[i][off + c] * k[j][off + c];
        logits[j] = dot / std::sqrt(static_cast<double>(dk));
      }
      double mx = logits[0];
      for (double l : logits) mx = std::max(mx, l);
      double denom = 0;
      std::vector<double> weights(nk);
      for (std::size_t j = 0; j < nk; ++j) {
        weights[j] = std::exp(logits[j] - mx);
        denom += weights[j];
      }
      for (std::size_t j = 0; j < nk; ++j) weights[j] /= denom;
      for (std::size_t c = 0; c < dk; ++c) {
        double acc = 0;
        for (std::size_t j = 0; j < nk; ++j) acc += weights[j] * v[j][off + c];
        concat[i][off + c] = acc;
      }
    }
  }
  return matmul(concat, p.wo);
}

Mat naive_layer_norm(const Mat& x, const std::vector<double>& gamma,
                     const std::vector<double>& beta) {
  const double eps = 1e-12;
  Mat out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double mu = 0;
    for (double v : x[i]) mu += v;
    mu /= static_cast<double>(x[i].size());
    double var = 0;
    for (double v : x[i]) var += (v - mu) * (v - mu);
    var /= static_cast<double>(x[i].size());
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < x[i].size(); ++j) {
      out[i][j] = gamma[j] * ((x[i][j] - mu) * inv) + beta[j];
    }
  }
  return out;
}

Mat naive_ffn(const Mat& x, const NaiveBlock& p) {
  Mat z = matmul(x, p.w1);
  for (auto& row : z) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = std::max(0.0, row[j] + p.b1[j]);
    }
  }
  Mat out = matmul(z, p.w2);
  for (auto& row : out) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += p.b2[j];
  }
  return out;
}

Mat naive_attention_block(const Mat& x, const NaiveBlock& p, int heads) {
  Mat h = naive_layer_norm(add(x, naive_multi_head(x, x, p, heads)),
                           p.ln1_gamma, p.ln1_beta);
  return naive_layer_norm(add(h, naive_ffn(h, p)), p.ln2_gamma, p.ln2_beta);
}

Mat naive_fuse_layer(const Mat& u, const NaiveBlock& p, int heads, bool full) {
  if (!full) return naive_multi_head(u, u, p, heads);
  return naive_attention_block(u, p, heads);
}

Mat naive_select_layer(const Mat& v, const Mat& u, const NaiveBlock& p,
                       int heads, bool full) {
  Mat attn = naive_multi_head(v, u, p, heads);
  if (!full) return add(v, attn);
  Mat h = naive_layer_norm(add(v, attn), p.ln1_gamma, p.ln1_beta);
  return naive_layer_norm(add(h, naive_ffn(h, p)), p.ln2_gamma, p.ln2_beta);
}

double max_abs_diff(const Mat& a, const Mat& b) {
  double mx = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[0].size(); ++j) {
      mx = std::max(mx, std::abs(a[i][j] - b[i][j]));
    }
  }
  return mx;
}

double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace refdic::testing
