// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "refdic/corpus.hpp"

namespace refdic {

// One row of features per detected region, stored row-major as read from
// disk.
struct RegionFeatureSet {
  ImageId id = 0;
  std::uint32_t regions = 0;  // N >= 1
  std::uint32_t dim = 0;      // D_in
  std::vector<float> data;    // regions x dim, row-major

  const float* row(std::uint32_t r) const { return data.data() + r * dim; }
};

// Binary layout ("RDICRG01"):
//   magic, u32 image count,
//   per image: u64 id, u32 N, u32 D_in, N x D_in x f32, all little-endian.
std::string region_features_to_bytes(const std::vector<RegionFeatureSet>& sets);
std::vector<RegionFeatureSet> region_features_from_bytes(
    const std::string& bytes);
std::vector<RegionFeatureSet> load_region_features(const std::string& path);

}  // namespace refdic
