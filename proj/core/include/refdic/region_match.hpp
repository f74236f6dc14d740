// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <Eigen/Core>
#include <vector>

#include "refdic/errors.hpp"
#include "refdic/region_features.hpp"

namespace refdic {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Affine projection into the shared memory space.
template <typename T>
struct ProjectionParams {
  Matrix<T> weight;  // D_in x d
  Vector<T> bias;    // d
};

struct RegionMatch {
  int region = 0;     // row index in the reference image
  double score = 0;   // cosine similarity of the chosen pair
};

// One target region plus its best-matching region in each reference image.
struct TargetReferenceTuple {
  int target_region = 0;
  std::vector<RegionMatch> matches;  // exactly K entries
};

template <typename T>
Matrix<T> feature_matrix(const RegionFeatureSet& set) {
  Matrix<T> m(set.regions, set.dim);
  for (std::uint32_t r = 0; r < set.regions; ++r) {
    for (std::uint32_t c = 0; c < set.dim; ++c) {
      m(r, c) = static_cast<T>(set.row(r)[c]);
    }
  }
  return m;
}

// Row-wise affine map into the memory space: out = X * W + b.
template <typename T>
Matrix<T> project(const Matrix<T>& features, const ProjectionParams<T>& params) {
  if (features.cols() != params.weight.rows() ||
      params.weight.cols() != params.bias.size()) {
    throw DimensionError(
        "project: features " + std::to_string(features.rows()) + "x" +
        std::to_string(features.cols()) + " vs weights " +
        std::to_string(params.weight.rows()) + "x" +
        std::to_string(params.weight.cols()));
  }
  Matrix<T> out = features * params.weight;
  out.rowwise() += params.bias.transpose();
  return out;
}

// S(i, j) = cos(ref row i, target row j); zero-norm rows give 0 entries.
template <typename T>
Matrix<T> similarity_matrix(const Matrix<T>& ref, const Matrix<T>& tgt) {
  if (ref.cols() != tgt.cols()) {
    throw DimensionError("similarity_matrix: memory dimensions differ");
  }
  Matrix<T> s(ref.rows(), tgt.rows());
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    const T ref_norm = ref.row(i).norm();
    for (Eigen::Index j = 0; j < tgt.rows(); ++j) {
      const T tgt_norm = tgt.row(j).norm();
      if (ref_norm == T(0) || tgt_norm == T(0)) {
        s(i, j) = T(0);
      } else {
        s(i, j) = ref.row(i).dot(tgt.row(j)) / (ref_norm * tgt_norm);
      }
    }
  }
  return s;
}

// Per target column, the smallest row index attaining the column maximum.
template <typename T>
std::vector<int> match_regions(const Matrix<T>& s) {
  if (s.rows() == 0 || s.cols() == 0) {
    throw DimensionError("match_regions: similarity matrix is empty");
  }
  std::vector<int> chosen(static_cast<std::size_t>(s.cols()));
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < s.rows(); ++i) {
      if (s(i, j) > s(best, j)) best = i;
    }
    chosen[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return chosen;
}

// Couples every target region with its most similar region per reference
// image. refs must hold K >= 1 matrices sharing the target's column count.
template <typename T>
std::vector<TargetReferenceTuple> build_tuples(
    const Matrix<T>& tgt, const std::vector<Matrix<T>>& refs) {
  if (refs.empty()) throw DomainError("build_tuples: reference list is empty");
  std::vector<TargetReferenceTuple> tuples(
      static_cast<std::size_t>(tgt.rows()));
  for (Eigen::Index n = 0; n < tgt.rows(); ++n) {
    tuples[static_cast<std::size_t>(n)].target_region = static_cast<int>(n);
    tuples[static_cast<std::size_t>(n)].matches.resize(refs.size());
  }
  for (std::size_t k = 0; k < refs.size(); ++k) {
    Matrix<T> s = similarity_matrix(refs[k], tgt);
    std::vector<int> chosen = match_regions(s);
    for (Eigen::Index j = 0; j < tgt.rows(); ++j) {
      auto& match = tuples[static_cast<std::size_t>(j)].matches[k];
      match.region = chosen[static_cast<std::size_t>(j)];
      match.score = static_cast<double>(s(match.region, j));
    }
  }
  return tuples;
}

}  // namespace refdic
