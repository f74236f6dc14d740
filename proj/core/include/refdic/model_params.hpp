// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <string>

#include "refdic/encoder.hpp"

namespace refdic {

// Projection layer + encoder stacks with the configuration and seed they
// were generated from. Held in double precision; narrowed on demand.
struct ModelParams {
  int d_in = 2048;
  EncoderConfig config;
  std::uint64_t seed = 0;
  ProjectionParams<double> projection;
  EncoderParams<double> encoder;
};

// Deterministic initialization: one UniformBits stream seeded with `seed`
// fills the projection first, then the encoder blocks in visit order.
ModelParams init_model_params(int d_in, const EncoderConfig& config,
                              std::uint64_t seed);

// Parameter file ("RDICPM01"): magic, u32 manifest length, manifest JSON,
// then every tensor row-major little-endian in manifest order. The
// manifest records dtype ("f32"/"f64"), seed, config, and tensor shapes.
std::string model_params_to_bytes(const ModelParams& params, bool f64);
ModelParams model_params_from_bytes(const std::string& bytes);
void save_model_params(const ModelParams& params, const std::string& path,
                       bool f64);
ModelParams load_model_params(const std::string& path);

// Narrowing for the 32-bit compute mode.
ProjectionParams<float> to_float(const ProjectionParams<double>& p);
EncoderParams<float> to_float(const EncoderParams<double>& p);

}  // namespace refdic
