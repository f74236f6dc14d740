// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/region_features.hpp"

#include <cmath>

#include "refdic/errors.hpp"
#include "refdic/io_util.hpp"

namespace refdic {

namespace {
constexpr char kMagic[] = "RDICRG01";
}

std::string region_features_to_bytes(
    const std::vector<RegionFeatureSet>& sets) {
  std::string out;
  out += kMagic;
  io::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(sets.size()));
  for (const auto& set : sets) {
    if (set.regions == 0) {
      throw DomainError("region features: image " + std::to_string(set.id) +
                        " has zero regions");
    }
    if (set.data.size() !=
        static_cast<std::size_t>(set.regions) * set.dim) {
      throw DimensionError("region features: image " + std::to_string(set.id) +
                           " data size does not match N x D_in");
    }
    io::append_le<std::uint64_t>(out, set.id);
    io::append_le<std::uint32_t>(out, set.regions);
    io::append_le<std::uint32_t>(out, set.dim);
    for (float v : set.data) io::append_le<float>(out, v);
  }
  return out;
}

std::vector<RegionFeatureSet> region_features_from_bytes(
    const std::string& bytes) {
  io::Reader reader(bytes, "region feature file");
  reader.expect_magic(kMagic);
  const auto count = reader.read<std::uint32_t>();
  std::vector<RegionFeatureSet> sets;
  sets.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    RegionFeatureSet set;
    set.id = reader.read<std::uint64_t>();
    set.regions = reader.read<std::uint32_t>();
    set.dim = reader.read<std::uint32_t>();
    if (set.regions == 0 || set.dim == 0) {
      throw SchemaError("region feature file: image " + std::to_string(set.id) +
                        " must have N >= 1 and D_in >= 1");
    }
    const std::size_t total =
        static_cast<std::size_t>(set.regions) * set.dim;
    set.data.resize(total);
    for (auto& v : set.data) {
      v = reader.read<float>();
      if (!std::isfinite(v)) {
        throw SchemaError("region feature file: non-finite entry for image " +
                          std::to_string(set.id));
      }
    }
    sets.push_back(std::move(set));
  }
  if (!reader.exhausted()) {
    throw SchemaError("region feature file: trailing bytes");
  }
  return sets;
}

std::vector<RegionFeatureSet> load_region_features(const std::string& path) {
  return region_features_from_bytes(io::read_file(path));
}

}  // namespace refdic
