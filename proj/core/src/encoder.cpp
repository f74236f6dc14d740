// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace refdic {

namespace {

template <typename T>
constexpr T kLnEps = T(1e-12);

template <typename T>
Matrix<T> layer_norm(const Matrix<T>& x, const Vector<T>& gamma,
                     const Vector<T>& beta, LnCache<T>* cache) {
  Matrix<T> xhat(x.rows(), x.cols());
  Vector<T> inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T mu = x.row(r).mean();
    const T var = (x.row(r).array() - mu).square().mean();
    const T is = T(1) / std::sqrt(var + kLnEps<T>);
    xhat.row(r) = ((x.row(r).array() - mu) * is).matrix();
    inv_std(r) = is;
  }
  Matrix<T> out =
      ((xhat.array().rowwise() * gamma.transpose().array()).rowwise() +
       beta.transpose().array())
          .matrix();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

template <typename T>
Matrix<T> layer_norm_backward(const Matrix<T>& d_out, const LnCache<T>& cache,
                              const Vector<T>& gamma, Vector<T>& d_gamma,
                              Vector<T>& d_beta) {
  Matrix<T> d_x(d_out.rows(), d_out.cols());
  for (Eigen::Index r = 0; r < d_out.rows(); ++r) {
    d_gamma +=
        (d_out.row(r).array() * cache.xhat.row(r).array()).matrix().transpose();
    d_beta += d_out.row(r).transpose();
    const auto dxhat =
        (d_out.row(r).array() * gamma.transpose().array()).eval();
    const T mean_dxhat = dxhat.mean();
    const T mean_dxhat_xhat = (dxhat * cache.xhat.row(r).array()).mean();
    d_x.row(r) = (cache.inv_std(r) *
                  (dxhat - mean_dxhat - cache.xhat.row(r).array() * mean_dxhat_xhat))
                     .matrix();
  }
  return d_x;
}

template <typename T>
void check_model_dim(const Matrix<T>& m, Eigen::Index d, const char* what) {
  if (m.cols() != d) {
    throw DimensionError(std::string(what) + ": expected " +
                         std::to_string(d) + " columns, got " +
                         std::to_string(m.cols()));
  }
  if (m.rows() < 1) {
    throw DimensionError(std::string(what) + ": needs at least one row");
  }
}

}  // namespace

void EncoderConfig::validate() const {
  if (d < 1 || h < 1 || d % h != 0) {
    throw DimensionError("encoder config: d must be a positive multiple of h");
  }
  if (l_t < 1 || l_fs < 1) {
    throw DimensionError("encoder config: l_t and l_fs must be >= 1");
  }
  if (d_ff < 1) throw DimensionError("encoder config: d_ff must be >= 1");
}

template <typename T>
Matrix<T> multi_head_attention(const Matrix<T>& q_in, const Matrix<T>& kv_in,
                               const BlockParams<T>& params, int heads,
                               MhCache<T>* cache) {
  const Eigen::Index d = params.wq.rows();
  check_model_dim(q_in, d, "attention query input");
  check_model_dim(kv_in, d, "attention key/value input");
  if (heads < 1 || d % heads != 0) {
    throw DimensionError("attention: head count must divide d");
  }
  const Eigen::Index dk = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dk));

  Matrix<T> q = q_in * params.wq;
  Matrix<T> k = kv_in * params.wk;
  Matrix<T> v = kv_in * params.wv;
  Matrix<T> concat(q_in.rows(), d);
  std::vector<Matrix<T>> attn(static_cast<std::size_t>(heads));
  for (int head = 0; head < heads; ++head) {
    const auto qh = q.middleCols(head * dk, dk);
    const auto kh = k.middleCols(head * dk, dk);
    const auto vh = v.middleCols(head * dk, dk);
    Matrix<T> logits = qh * kh.transpose() * scale;
    Matrix<T> a(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      const T mx = logits.row(r).maxCoeff();
      a.row(r) = (logits.row(r).array() - mx).exp().matrix();
      a.row(r) /= a.row(r).sum();
    }
    concat.middleCols(head * dk, dk) = a * vh;
    attn[static_cast<std::size_t>(head)] = std::move(a);
  }
  Matrix<T> out = concat * params.wo;
  if (cache) {
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->attn = std::move(attn);
    cache->concat = std::move(concat);
  }
  return out;
}

namespace {

template <typename T>
void multi_head_backward(const Matrix<T>& d_out, const Matrix<T>& q_in,
                         const Matrix<T>& kv_in, const MhCache<T>& cache,
                         const BlockParams<T>& params, int heads,
                         BlockParams<T>& grad, Matrix<T>& d_q_in,
                         Matrix<T>& d_kv_in) {
  const Eigen::Index d = params.wq.rows();
  const Eigen::Index dk = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dk));

  grad.wo += cache.concat.transpose() * d_out;
  Matrix<T> d_concat = d_out * params.wo.transpose();
  Matrix<T> d_q = Matrix<T>::Zero(q_in.rows(), d);
  Matrix<T> d_k = Matrix<T>::Zero(kv_in.rows(), d);
  Matrix<T> d_v = Matrix<T>::Zero(kv_in.rows(), d);
  for (int head = 0; head < heads; ++head) {
    const auto& a = cache.attn[static_cast<std::size_t>(head)];
    const auto qh = cache.q.middleCols(head * dk, dk);
    const auto kh = cache.k.middleCols(head * dk, dk);
    const auto vh = cache.v.middleCols(head * dk, dk);
    const Matrix<T> d_oh = d_concat.middleCols(head * dk, dk);
    d_v.middleCols(head * dk, dk) += a.transpose() * d_oh;
    Matrix<T> d_a = d_oh * vh.transpose();
    Matrix<T> d_logits(a.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const T dot = a.row(r).dot(d_a.row(r));
      d_logits.row(r) =
          (a.row(r).array() * (d_a.row(r).array() - dot)).matrix();
    }
    d_q.middleCols(head * dk, dk) += d_logits * kh * scale;
    d_k.middleCols(head * dk, dk) += d_logits.transpose() * qh * scale;
  }
  grad.wq += q_in.transpose() * d_q;
  grad.wk += kv_in.transpose() * d_k;
  grad.wv += kv_in.transpose() * d_v;
  d_q_in += d_q * params.wq.transpose();
  d_kv_in += d_k * params.wk.transpose();
  d_kv_in += d_v * params.wv.transpose();
}

template <typename T>
Matrix<T> block_forward(const Matrix<T>& q_in, const Matrix<T>& kv_in,
                        const BlockParams<T>& params, int heads,
                        BlockStructure structure, BlockCache<T>* cache) {
  Matrix<T> attn_out = multi_head_attention(q_in, kv_in, params, heads,
                                            cache ? &cache->mh : nullptr);
  if (cache) {
    cache->q_in = q_in;
    cache->kv_in = kv_in;
    cache->full_block = structure == BlockStructure::kFull;
    cache->residual_only = structure == BlockStructure::kResidualOnly;
  }
  if (structure == BlockStructure::kBare) return attn_out;
  if (structure == BlockStructure::kResidualOnly) return q_in + attn_out;

  Matrix<T> sum1 = q_in + attn_out;
  Matrix<T> h = layer_norm(sum1, params.ln1_gamma, params.ln1_beta,
                           cache ? &cache->ln1 : nullptr);
  Matrix<T> z1 = h * params.w1;
  z1.rowwise() += params.b1.transpose();
  Matrix<T> f = z1.cwiseMax(T(0)) * params.w2;
  f.rowwise() += params.b2.transpose();
  Matrix<T> sum2 = h + f;
  Matrix<T> out = layer_norm(sum2, params.ln2_gamma, params.ln2_beta,
                             cache ? &cache->ln2 : nullptr);
  if (cache) {
    cache->h = std::move(h);
    cache->z1 = std::move(z1);
  }
  return out;
}

template <typename T>
void block_backward(const Matrix<T>& d_out, const BlockCache<T>& cache,
                    const BlockParams<T>& params, int heads,
                    BlockParams<T>& grad, Matrix<T>& d_q_in,
                    Matrix<T>& d_kv_in) {
  if (!cache.full_block) {
    if (cache.residual_only) d_q_in += d_out;
    multi_head_backward(d_out, cache.q_in, cache.kv_in, cache.mh, params,
                        heads, grad, d_q_in, d_kv_in);
    return;
  }
  Matrix<T> d_sum2 = layer_norm_backward(d_out, cache.ln2, params.ln2_gamma,
                                         grad.ln2_gamma, grad.ln2_beta);
  const Matrix<T> activated = cache.z1.cwiseMax(T(0));
  grad.w2 += activated.transpose() * d_sum2;
  grad.b2 += d_sum2.colwise().sum().transpose();
  Matrix<T> d_act = d_sum2 * params.w2.transpose();
  Matrix<T> d_z1 =
      (d_act.array() * (cache.z1.array() > T(0)).template cast<T>()).matrix();
  grad.w1 += cache.h.transpose() * d_z1;
  grad.b1 += d_z1.colwise().sum().transpose();
  Matrix<T> d_h = d_sum2 + d_z1 * params.w1.transpose();
  Matrix<T> d_sum1 = layer_norm_backward(d_h, cache.ln1, params.ln1_gamma,
                                         grad.ln1_gamma, grad.ln1_beta);
  d_q_in += d_sum1;
  multi_head_backward(d_sum1, cache.q_in, cache.kv_in, cache.mh, params, heads,
                      grad, d_q_in, d_kv_in);
}

template <typename T>
BlockParams<T> zero_block(const EncoderConfig& cfg) {
  BlockParams<T> b;
  b.wq = Matrix<T>::Zero(cfg.d, cfg.d);
  b.wk = Matrix<T>::Zero(cfg.d, cfg.d);
  b.wv = Matrix<T>::Zero(cfg.d, cfg.d);
  b.wo = Matrix<T>::Zero(cfg.d, cfg.d);
  b.w1 = Matrix<T>::Zero(cfg.d, cfg.d_ff);
  b.b1 = Vector<T>::Zero(cfg.d_ff);
  b.w2 = Matrix<T>::Zero(cfg.d_ff, cfg.d);
  b.b2 = Vector<T>::Zero(cfg.d);
  b.ln1_gamma = Vector<T>::Zero(cfg.d);
  b.ln1_beta = Vector<T>::Zero(cfg.d);
  b.ln2_gamma = Vector<T>::Zero(cfg.d);
  b.ln2_beta = Vector<T>::Zero(cfg.d);
  return b;
}

template <typename T>
EncoderParams<T> zero_params(const EncoderConfig& cfg) {
  EncoderParams<T> p;
  p.target.resize(static_cast<std::size_t>(cfg.l_t));
  p.fuse.resize(static_cast<std::size_t>(cfg.l_fs));
  p.select.resize(static_cast<std::size_t>(cfg.l_fs));
  for (auto& b : p.target) b = zero_block<T>(cfg);
  for (auto& b : p.fuse) b = zero_block<T>(cfg);
  for (auto& b : p.select) b = zero_block<T>(cfg);
  return p;
}

template <typename T>
void validate_params_impl(const EncoderParams<T>& params,
                          const EncoderConfig& cfg) {
  cfg.validate();
  if (params.target.size() != static_cast<std::size_t>(cfg.l_t) ||
      params.fuse.size() != static_cast<std::size_t>(cfg.l_fs) ||
      params.select.size() != static_cast<std::size_t>(cfg.l_fs)) {
    throw DimensionError("encoder params: layer counts do not match config");
  }
  auto check = [&](const std::string& name, const auto& tensor,
                   Eigen::Index rows, Eigen::Index cols) {
    if (tensor.rows() != rows || tensor.cols() != cols) {
      throw DimensionError("encoder params: " + name + " has shape " +
                           std::to_string(tensor.rows()) + "x" +
                           std::to_string(tensor.cols()) + ", expected " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    }
  };
  visit_encoder_params(params, [&](const std::string& name, const auto& t) {
    if (name.ends_with(".w1")) {
      check(name, t, cfg.d, cfg.d_ff);
    } else if (name.ends_with(".w2")) {
      check(name, t, cfg.d_ff, cfg.d);
    } else if (name.ends_with(".b1")) {
      check(name, t, cfg.d_ff, 1);
    } else if (name.ends_with(".b2") || name.find("ln") != std::string::npos) {
      check(name, t, cfg.d, 1);
    } else {
      check(name, t, cfg.d, cfg.d);
    }
  });
}

}  // namespace

void validate_encoder_params(const EncoderParams<double>& params,
                             const EncoderConfig& cfg) {
  validate_params_impl(params, cfg);
}
void validate_encoder_params(const EncoderParams<float>& params,
                             const EncoderConfig& cfg) {
  validate_params_impl(params, cfg);
}

template <typename T>
Matrix<T> attention_block(const Matrix<T>& x, const BlockParams<T>& params,
                          int heads, BlockCache<T>* cache) {
  return block_forward(x, x, params, heads, BlockStructure::kFull, cache);
}

template <typename T>
Matrix<T> target_flow(const Matrix<T>& m_t, const EncoderParams<T>& params,
                      const EncoderConfig& cfg,
                      std::vector<BlockCache<T>>* caches) {
  if (caches) caches->resize(params.target.size());
  Matrix<T> x = m_t;
  for (std::size_t l = 0; l < params.target.size(); ++l) {
    x = attention_block(x, params.target[l], cfg.h,
                        caches ? &(*caches)[l] : nullptr);
  }
  return x;
}

template <typename T>
Matrix<T> fuse_layer(const Matrix<T>& u, const BlockParams<T>& params,
                     const EncoderConfig& cfg, BlockCache<T>* cache) {
  const BlockStructure structure = cfg.residual_in_fuse_select
                                       ? BlockStructure::kFull
                                       : BlockStructure::kBare;
  return block_forward(u, u, params, cfg.h, structure, cache);
}

template <typename T>
Matrix<T> select_layer(const Matrix<T>& v, const Matrix<T>& u,
                       const BlockParams<T>& params, const EncoderConfig& cfg,
                       BlockCache<T>* cache) {
  const BlockStructure structure = cfg.residual_in_fuse_select
                                       ? BlockStructure::kFull
                                       : BlockStructure::kResidualOnly;
  return block_forward(v, u, params, cfg.h, structure, cache);
}

template <typename T>
Matrix<T> target_reference_flow(const Matrix<T>& m_t,
                                const std::vector<Matrix<T>>& ref_mems,
                                const std::vector<TargetReferenceTuple>& tuples,
                                const EncoderParams<T>& params,
                                const EncoderConfig& cfg,
                                std::vector<TupleFlowCache<T>>* caches) {
  const Eigen::Index n = m_t.rows();
  const Eigen::Index d = m_t.cols();
  if (tuples.size() != static_cast<std::size_t>(n)) {
    throw DimensionError("target_reference_flow: one tuple per target region");
  }
  if (caches) caches->resize(tuples.size());
  Matrix<T> out(n, d);
  const std::size_t layers = params.fuse.size();
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const auto& tuple = tuples[t];
    Matrix<T> u(static_cast<Eigen::Index>(tuple.matches.size()), d);
    for (std::size_t k = 0; k < tuple.matches.size(); ++k) {
      u.row(static_cast<Eigen::Index>(k)) =
          ref_mems[k].row(tuple.matches[k].region);
    }
    Matrix<T> v = m_t.row(tuple.target_region);
    TupleFlowCache<T>* tc = caches ? &(*caches)[t] : nullptr;
    if (tc) {
      tc->u0 = u;
      tc->v0 = v;
      tc->fuse.resize(layers);
      tc->select.resize(layers);
    }
    for (std::size_t l = 0; l < layers; ++l) {
      // Select layer l consumes the previous fuse output, so it runs
      // before u advances.
      Matrix<T> v_next = select_layer(v, u, params.select[l], cfg,
                                      tc ? &tc->select[l] : nullptr);
      Matrix<T> u_next =
          fuse_layer(u, params.fuse[l], cfg, tc ? &tc->fuse[l] : nullptr);
      v = std::move(v_next);
      u = std::move(u_next);
    }
    out.row(static_cast<Eigen::Index>(t)) = v;
  }
  return out;
}

template <typename T>
Matrix<T> encode(const Matrix<T>& m_t, const std::vector<Matrix<T>>& ref_mems,
                 const EncoderParams<T>& params, const EncoderConfig& cfg,
                 EncodeCache<T>* cache) {
  cfg.validate();
  check_model_dim(m_t, cfg.d, "encode target memory");
  if (ref_mems.empty()) {
    throw DomainError("encode: reference memory list is empty");
  }
  for (const auto& ref : ref_mems) {
    check_model_dim(ref, cfg.d, "encode reference memory");
  }
  Matrix<T> hat = target_flow(m_t, params, cfg,
                              cache ? &cache->target_blocks : nullptr);
  std::vector<TargetReferenceTuple> tuples = build_tuples(m_t, ref_mems);
  Matrix<T> tilde = target_reference_flow(
      m_t, ref_mems, tuples, params, cfg,
      cache ? &cache->tuple_flows : nullptr);
  if (cache) cache->tuples = tuples;
  Matrix<T> out(2 * m_t.rows(), cfg.d);
  out.topRows(m_t.rows()) = hat;
  out.bottomRows(m_t.rows()) = tilde;
  return out;
}

EncoderParams<double> encode_backward(const Matrix<double>& m_t,
                                      const std::vector<Matrix<double>>& ref_mems,
                                      const EncoderParams<double>& params,
                                      const EncoderConfig& cfg) {
  validate_encoder_params(params, cfg);
  EncodeCache<double> cache;
  encode(m_t, ref_mems, params, cfg, &cache);

  EncoderParams<double> grads = zero_params<double>(cfg);
  const Eigen::Index n = m_t.rows();
  const Eigen::Index d = m_t.cols();

  // Readout is the plain sum of every output entry.
  Matrix<double> d_x = Matrix<double>::Ones(n, d);
  for (std::size_t l = cache.target_blocks.size(); l-- > 0;) {
    Matrix<double> d_in =
        Matrix<double>::Zero(cache.target_blocks[l].q_in.rows(), d);
    block_backward(d_x, cache.target_blocks[l], params.target[l], cfg.h,
                   grads.target[l], d_in, d_in);
    d_x = std::move(d_in);
  }

  const std::size_t layers = params.fuse.size();
  for (std::size_t t = 0; t < cache.tuple_flows.size(); ++t) {
    const auto& tc = cache.tuple_flows[t];
    Matrix<double> d_v = Matrix<double>::Ones(1, d);
    Matrix<double> d_u = Matrix<double>::Zero(tc.u0.rows(), d);
    for (std::size_t l = layers; l-- > 0;) {
      Matrix<double> d_v_prev = Matrix<double>::Zero(1, d);
      Matrix<double> d_u_prev = Matrix<double>::Zero(tc.u0.rows(), d);
      block_backward(d_v, tc.select[l], params.select[l], cfg.h,
                     grads.select[l], d_v_prev, d_u_prev);
      block_backward(d_u, tc.fuse[l], params.fuse[l], cfg.h, grads.fuse[l],
                     d_u_prev, d_u_prev);
      d_v = std::move(d_v_prev);
      d_u = std::move(d_u_prev);
    }
  }
  return grads;
}

namespace {

double readout(const Matrix<double>& out) { return out.sum(); }

struct TensorSlot {
  std::string name;
  double* data = nullptr;
  const double* grad = nullptr;
  long size = 0;
};

}  // namespace

GradCheckReport grad_check(const Matrix<double>& m_t,
                           const std::vector<Matrix<double>>& ref_mems,
                           const EncoderParams<double>& params,
                           const EncoderConfig& cfg, double epsilon,
                           int num_samples, std::uint64_t sample_seed) {
  if (epsilon <= 0) throw DomainError("grad_check: epsilon must be > 0");
  if (num_samples < 1) throw DomainError("grad_check: num_samples must be >= 1");

  EncoderParams<double> grads = encode_backward(m_t, ref_mems, params, cfg);
  visit_encoder_params(grads, [](const std::string& name, const auto& t) {
    for (long i = 0; i < t.size(); ++i) {
      if (!std::isfinite(t.data()[i])) {
        throw DomainError("grad_check: non-finite gradient in " + name +
                          " at index " + std::to_string(i));
      }
    }
  });

  EncoderParams<double> work = params;
  std::vector<TensorSlot> slots;
  visit_encoder_params(work, [&](const std::string& name, auto& t) {
    slots.push_back({name, t.data(), nullptr, t.size()});
  });
  {
    std::size_t i = 0;
    visit_encoder_params(grads, [&](const std::string&, const auto& t) {
      slots[i++].grad = t.data();
    });
  }
  long total = 0;
  for (const auto& s : slots) total += s.size;

  std::set<long> picked;
  if (num_samples >= total) {
    for (long i = 0; i < total; ++i) picked.insert(i);
  } else {
    UniformBits rng(sample_seed);
    while (picked.size() < static_cast<std::size_t>(num_samples)) {
      picked.insert(static_cast<long>(
          rng.next_below(static_cast<std::uint64_t>(total))));
    }
  }

  GradCheckReport report;
  for (long flat : picked) {
    long offset = flat;
    const TensorSlot* slot = nullptr;
    for (const auto& s : slots) {
      if (offset < s.size) {
        slot = &s;
        break;
      }
      offset -= s.size;
    }
    const double original = slot->data[offset];
    slot->data[offset] = original + epsilon;
    const double f_plus = readout(encode(m_t, ref_mems, work, cfg));
    slot->data[offset] = original - epsilon;
    const double f_minus = readout(encode(m_t, ref_mems, work, cfg));
    slot->data[offset] = original;

    GradCheckSample sample;
    sample.tensor = slot->name;
    sample.index = offset;
    sample.analytic = slot->grad[offset];
    sample.numeric = (f_plus - f_minus) / (2 * epsilon);
    sample.rel_error = std::abs(sample.analytic - sample.numeric) /
                       std::max(1e-8, std::abs(sample.numeric));
    report.max_rel_error = std::max(report.max_rel_error, sample.rel_error);
    report.samples.push_back(std::move(sample));
  }
  return report;
}

EncoderParams<double> init_encoder_params(const EncoderConfig& cfg,
                                          UniformBits& rng) {
  cfg.validate();
  EncoderParams<double> params = zero_params<double>(cfg);
  visit_encoder_params(params, [&](const std::string& name, auto& t) {
    if (name.ends_with("gamma")) {
      // Jittered around 1. Exactly-unit scales make the row sum of a
      // layer-norm output independent of its input (the normalized row
      // sums to zero), which degenerates sum-readout gradient checks.
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        t(i) = 1.0 + rng.next_symmetric(0.1);
      }
    } else if (name.ends_with("beta") || name.ends_with(".b1") ||
               name.ends_with(".b2")) {
      t.setZero();
    } else {
      const double limit =
          std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) {
          t(r, c) = rng.next_symmetric(limit);
        }
      }
    }
  });
  return params;
}

ProjectionParams<double> init_projection_params(int d_in, int d,
                                                UniformBits& rng) {
  if (d_in < 1 || d < 1) {
    throw DimensionError("projection init: dimensions must be >= 1");
  }
  ProjectionParams<double> proj;
  proj.weight = Matrix<double>::Zero(d_in, d);
  proj.bias = Vector<double>::Zero(d);
  const double limit = std::sqrt(6.0 / static_cast<double>(d_in + d));
  for (int r = 0; r < d_in; ++r) {
    for (int c = 0; c < d; ++c) {
      proj.weight(r, c) = rng.next_symmetric(limit);
    }
  }
  return proj;
}

// Explicit instantiations: the CLI runs both precisions, tests use double.
#define REFDIC_INSTANTIATE(T)                                                  \
  template Matrix<T> multi_head_attention<T>(const Matrix<T>&,                \
                                             const Matrix<T>&,                \
                                             const BlockParams<T>&, int,      \
                                             MhCache<T>*);                    \
  template Matrix<T> attention_block<T>(const Matrix<T>&,                     \
                                        const BlockParams<T>&, int,           \
                                        BlockCache<T>*);                      \
  template Matrix<T> target_flow<T>(const Matrix<T>&, const EncoderParams<T>&,\
                                    const EncoderConfig&,                     \
                                    std::vector<BlockCache<T>>*);             \
  template Matrix<T> fuse_layer<T>(const Matrix<T>&, const BlockParams<T>&,   \
                                   const EncoderConfig&, BlockCache<T>*);     \
  template Matrix<T> select_layer<T>(const Matrix<T>&, const Matrix<T>&,      \
                                     const BlockParams<T>&,                   \
                                     const EncoderConfig&, BlockCache<T>*);   \
  template Matrix<T> target_reference_flow<T>(                                \
      const Matrix<T>&, const std::vector<Matrix<T>>&,                        \
      const std::vector<TargetReferenceTuple>&, const EncoderParams<T>&,      \
      const EncoderConfig&, std::vector<TupleFlowCache<T>>*);                 \
  template Matrix<T> encode<T>(const Matrix<T>&, const std::vector<Matrix<T>>&,\
                               const EncoderParams<T>&, const EncoderConfig&, \
                               EncodeCache<T>*);

REFDIC_INSTANTIATE(float)
REFDIC_INSTANTIATE(double)
#undef REFDIC_INSTANTIATE

}  // namespace refdic
