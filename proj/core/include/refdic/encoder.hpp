// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <string>
#include <vector>

#include "refdic/region_match.hpp"
#include "refdic/rng.hpp"

namespace refdic {

struct EncoderConfig {
  int d = 512;      // model dimension
  int h = 8;        // attention heads, must divide d
  int l_t = 3;      // self-attention blocks in the target flow
  int l_fs = 3;     // fuse/select layers in the target-reference flow
  int d_ff = 2048;  // feed-forward width
  // Full residual + layer-norm + feed-forward structure inside fuse and
  // select layers. When off, a fuse layer is bare attention and a select
  // layer keeps only the residual from its query.
  bool residual_in_fuse_select = true;

  void validate() const;
};

// One attention block: query/key/value/output projections, feed-forward
// matrices with biases, and two layer-norm scale/shift pairs.
template <typename T>
struct BlockParams {
  Matrix<T> wq, wk, wv, wo;          // d x d
  Matrix<T> w1;                      // d x d_ff
  Vector<T> b1;                      // d_ff
  Matrix<T> w2;                      // d_ff x d
  Vector<T> b2;                      // d
  Vector<T> ln1_gamma, ln1_beta;     // d
  Vector<T> ln2_gamma, ln2_beta;     // d
};

template <typename T>
struct EncoderParams {
  std::vector<BlockParams<T>> target;       // l_t blocks
  std::vector<BlockParams<T>> fuse;         // l_fs blocks
  std::vector<BlockParams<T>> select;       // l_fs blocks
};

// Visits every tensor of a block as fn(name, tensor). Ordering here fixes
// the serialization and initialization order of the whole model.
template <typename Block, typename Fn>
void visit_block(Block& block, const std::string& prefix, Fn&& fn) {
  fn(prefix + ".wq", block.wq);
  fn(prefix + ".wk", block.wk);
  fn(prefix + ".wv", block.wv);
  fn(prefix + ".wo", block.wo);
  fn(prefix + ".w1", block.w1);
  fn(prefix + ".b1", block.b1);
  fn(prefix + ".w2", block.w2);
  fn(prefix + ".b2", block.b2);
  fn(prefix + ".ln1_gamma", block.ln1_gamma);
  fn(prefix + ".ln1_beta", block.ln1_beta);
  fn(prefix + ".ln2_gamma", block.ln2_gamma);
  fn(prefix + ".ln2_beta", block.ln2_beta);
}

template <typename Params, typename Fn>
void visit_encoder_params(Params& params, Fn&& fn) {
  for (std::size_t i = 0; i < params.target.size(); ++i) {
    visit_block(params.target[i], "target[" + std::to_string(i) + "]", fn);
  }
  for (std::size_t i = 0; i < params.fuse.size(); ++i) {
    visit_block(params.fuse[i], "fuse[" + std::to_string(i) + "]", fn);
  }
  for (std::size_t i = 0; i < params.select.size(); ++i) {
    visit_block(params.select[i], "select[" + std::to_string(i) + "]", fn);
  }
}

// Forward caches. Tests use these to inspect attention weights; the
// backward pass consumes them.
template <typename T>
struct LnCache {
  Matrix<T> xhat;
  Vector<T> inv_std;
};

template <typename T>
struct MhCache {
  Matrix<T> q, k, v;             // projected inputs
  std::vector<Matrix<T>> attn;   // per head, rows sum to 1
  Matrix<T> concat;              // heads concatenated, before wo
};

template <typename T>
struct BlockCache {
  Matrix<T> q_in, kv_in;
  MhCache<T> mh;
  LnCache<T> ln1;
  Matrix<T> h;        // LN1 output
  Matrix<T> z1;       // feed-forward pre-activation
  LnCache<T> ln2;
  bool full_block = true;
  bool residual_only = false;
};

enum class BlockStructure {
  kFull,          // LN(x + MH) then LN(h + FFN)
  kBare,          // MH only
  kResidualOnly,  // q_in + MH
};

// Multi-head scaled dot-product attention (h heads over d/h slices).
template <typename T>
Matrix<T> multi_head_attention(const Matrix<T>& q_in, const Matrix<T>& kv_in,
                               const BlockParams<T>& params, int heads,
                               MhCache<T>* cache = nullptr);

// H = LN(X + MH(X,X,X)); out = LN(H + FFN(H)).
template <typename T>
Matrix<T> attention_block(const Matrix<T>& x, const BlockParams<T>& params,
                          int heads, BlockCache<T>* cache = nullptr);

// Composition of l_t attention blocks over the target memory features.
template <typename T>
Matrix<T> target_flow(const Matrix<T>& m_t, const EncoderParams<T>& params,
                      const EncoderConfig& cfg,
                      std::vector<BlockCache<T>>* caches = nullptr);

// Self-attention over the K reference rows of one tuple.
template <typename T>
Matrix<T> fuse_layer(const Matrix<T>& u, const BlockParams<T>& params,
                     const EncoderConfig& cfg, BlockCache<T>* cache = nullptr);

// Cross-attention with the target row as query over the fuse ladder; the
// residual from the query is always kept.
template <typename T>
Matrix<T> select_layer(const Matrix<T>& v, const Matrix<T>& u,
                       const BlockParams<T>& params, const EncoderConfig& cfg,
                       BlockCache<T>* cache = nullptr);

template <typename T>
struct TupleFlowCache {
  Matrix<T> u0;                        // gathered reference rows (K x d)
  Matrix<T> v0;                        // target row (1 x d)
  std::vector<BlockCache<T>> fuse;
  std::vector<BlockCache<T>> select;
};

// Runs the fuse/select ladder per tuple: U_l = fuse_l(U_{l-1}),
// V_l = select_l(V_{l-1}, U_{l-1}); row n of the result is V_{l_fs} of
// tuple n.
template <typename T>
Matrix<T> target_reference_flow(const Matrix<T>& m_t,
                                const std::vector<Matrix<T>>& ref_mems,
                                const std::vector<TargetReferenceTuple>& tuples,
                                const EncoderParams<T>& params,
                                const EncoderConfig& cfg,
                                std::vector<TupleFlowCache<T>>* caches = nullptr);

template <typename T>
struct EncodeCache {
  std::vector<BlockCache<T>> target_blocks;
  std::vector<TargetReferenceTuple> tuples;
  std::vector<TupleFlowCache<T>> tuple_flows;
};

// Full encoder: rows [0, N) are the target flow output, rows [N, 2N) the
// target-reference flow output.
template <typename T>
Matrix<T> encode(const Matrix<T>& m_t, const std::vector<Matrix<T>>& ref_mems,
                 const EncoderParams<T>& params, const EncoderConfig& cfg,
                 EncodeCache<T>* cache = nullptr);

// Analytic parameter gradients of readout = sum of all encode() entries.
EncoderParams<double> encode_backward(const Matrix<double>& m_t,
                                      const std::vector<Matrix<double>>& ref_mems,
                                      const EncoderParams<double>& params,
                                      const EncoderConfig& cfg);

struct GradCheckSample {
  std::string tensor;
  long index = 0;  // storage index within the tensor
  double analytic = 0;
  double numeric = 0;
  double rel_error = 0;
};

struct GradCheckReport {
  double max_rel_error = 0;
  std::vector<GradCheckSample> samples;
};

// Central-difference verification of encode_backward over sampled
// parameters: rel = |analytic - numeric| / max(1e-8, |numeric|).
GradCheckReport grad_check(const Matrix<double>& m_t,
                           const std::vector<Matrix<double>>& ref_mems,
                           const EncoderParams<double>& params,
                           const EncoderConfig& cfg, double epsilon,
                           int num_samples, std::uint64_t sample_seed);

// Xavier-style scaled-uniform initialization: matrices draw from
// [-sqrt(6/(fan_in+fan_out)), ...) in row-major element order off one
// shared UniformBits stream; biases and layer-norm shifts start at 0,
// layer-norm scales uniform in [0.9, 1.1).
EncoderParams<double> init_encoder_params(const EncoderConfig& cfg,
                                          UniformBits& rng);
ProjectionParams<double> init_projection_params(int d_in, int d,
                                                UniformBits& rng);

void validate_encoder_params(const EncoderParams<double>& params,
                             const EncoderConfig& cfg);
void validate_encoder_params(const EncoderParams<float>& params,
                             const EncoderConfig& cfg);

}  // namespace refdic
