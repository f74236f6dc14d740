// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/model_params.hpp"

#include <json.hpp>

#include "refdic/errors.hpp"
#include "refdic/io_util.hpp"

namespace refdic {

namespace {

constexpr char kMagic[] = "RDICPM01";

template <typename Fn>
void visit_model(ModelParams& params, Fn&& fn) {
  fn(std::string("projection.weight"), params.projection.weight);
  fn(std::string("projection.bias"), params.projection.bias);
  visit_encoder_params(params.encoder, fn);
}

template <typename Fn>
void visit_model(const ModelParams& params, Fn&& fn) {
  fn(std::string("projection.weight"), params.projection.weight);
  fn(std::string("projection.bias"), params.projection.bias);
  visit_encoder_params(params.encoder, fn);
}

}  // namespace

ModelParams init_model_params(int d_in, const EncoderConfig& config,
                              std::uint64_t seed) {
  config.validate();
  ModelParams params;
  params.d_in = d_in;
  params.config = config;
  params.seed = seed;
  UniformBits rng(seed);
  params.projection = init_projection_params(d_in, config.d, rng);
  params.encoder = init_encoder_params(config, rng);
  return params;
}

std::string model_params_to_bytes(const ModelParams& params, bool f64) {
  nlohmann::json manifest;
  manifest["format"] = "refdic-params";
  manifest["dtype"] = f64 ? "f64" : "f32";
  manifest["seed"] = params.seed;
  manifest["config"] = {
      {"d_in", params.d_in},
      {"d", params.config.d},
      {"h", params.config.h},
      {"l_t", params.config.l_t},
      {"l_fs", params.config.l_fs},
      {"d_ff", params.config.d_ff},
      {"residual_in_fuse_select", params.config.residual_in_fuse_select},
  };
  auto& tensors = manifest["tensors"] = nlohmann::json::array();
  std::string blob;
  visit_model(params, [&](const std::string& name, const auto& t) {
    tensors.push_back({{"name", name},
                       {"rows", static_cast<long>(t.rows())},
                       {"cols", static_cast<long>(t.cols())}});
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        if (f64) {
          io::append_le<double>(blob, t(r, c));
        } else {
          io::append_le<float>(blob, static_cast<float>(t(r, c)));
        }
      }
    }
  });
  const std::string manifest_text = manifest.dump();
  std::string out;
  out += kMagic;
  io::append_le<std::uint32_t>(out,
                               static_cast<std::uint32_t>(manifest_text.size()));
  out += manifest_text;
  out += blob;
  return out;
}

ModelParams model_params_from_bytes(const std::string& bytes) {
  io::Reader reader(bytes, "parameter file");
  reader.expect_magic(kMagic);
  const auto manifest_len = reader.read<std::uint32_t>();
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(reader.read_bytes(manifest_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("parameter manifest: ") + e.what(), e.byte);
  }
  if (manifest.value("format", "") != "refdic-params") {
    throw SchemaError("parameter file: unknown format field");
  }
  const std::string dtype = manifest.value("dtype", "");
  if (dtype != "f32" && dtype != "f64") {
    throw SchemaError("parameter file: dtype must be \"f32\" or \"f64\"");
  }
  const bool f64 = dtype == "f64";
  const auto& cfg_json = manifest.at("config");

  ModelParams params;
  params.seed = manifest.value("seed", std::uint64_t{0});
  params.d_in = cfg_json.at("d_in").get<int>();
  params.config.d = cfg_json.at("d").get<int>();
  params.config.h = cfg_json.at("h").get<int>();
  params.config.l_t = cfg_json.at("l_t").get<int>();
  params.config.l_fs = cfg_json.at("l_fs").get<int>();
  params.config.d_ff = cfg_json.at("d_ff").get<int>();
  params.config.residual_in_fuse_select =
      cfg_json.value("residual_in_fuse_select", true);
  params.config.validate();
  if (params.d_in < 1) {
    throw SchemaError("parameter file: d_in must be >= 1");
  }

  // Allocate via the deterministic initializer, then overwrite from blob.
  ModelParams shaped = init_model_params(params.d_in, params.config, 0);
  params.projection = std::move(shaped.projection);
  params.encoder = std::move(shaped.encoder);

  std::size_t tensor_index = 0;
  const auto& tensors = manifest.at("tensors");
  visit_model(params, [&](const std::string& name, auto& t) {
    if (tensor_index >= tensors.size()) {
      throw SchemaError("parameter file: manifest lists too few tensors");
    }
    const auto& entry = tensors[tensor_index++];
    if (entry.value("name", "") != name ||
        entry.value("rows", -1L) != static_cast<long>(t.rows()) ||
        entry.value("cols", -1L) != static_cast<long>(t.cols())) {
      throw SchemaError("parameter file: tensor " + name +
                        " missing or has unexpected shape in manifest");
    }
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        t(r, c) = f64 ? reader.read<double>()
                      : static_cast<double>(reader.read<float>());
      }
    }
  });
  if (tensor_index != tensors.size()) {
    throw SchemaError("parameter file: manifest lists extra tensors");
  }
  if (!reader.exhausted()) {
    throw SchemaError("parameter file: trailing bytes after blob");
  }
  return params;
}

void save_model_params(const ModelParams& params, const std::string& path,
                       bool f64) {
  io::write_file_atomic(path, model_params_to_bytes(params, f64));
}

ModelParams load_model_params(const std::string& path) {
  return model_params_from_bytes(io::read_file(path));
}

ProjectionParams<float> to_float(const ProjectionParams<double>& p) {
  ProjectionParams<float> out;
  out.weight = p.weight.cast<float>();
  out.bias = p.bias.cast<float>();
  return out;
}

EncoderParams<float> to_float(const EncoderParams<double>& p) {
  EncoderParams<float> out;
  auto convert = [](const BlockParams<double>& b) {
    BlockParams<float> f;
    f.wq = b.wq.cast<float>();
    f.wk = b.wk.cast<float>();
    f.wv = b.wv.cast<float>();
    f.wo = b.wo.cast<float>();
    f.w1 = b.w1.cast<float>();
    f.b1 = b.b1.cast<float>();
    f.w2 = b.w2.cast<float>();
    f.b2 = b.b2.cast<float>();
    f.ln1_gamma = b.ln1_gamma.cast<float>();
    f.ln1_beta = b.ln1_beta.cast<float>();
    f.ln2_gamma = b.ln2_gamma.cast<float>();
    f.ln2_beta = b.ln2_beta.cast<float>();
    return f;
  };
  for (const auto& b : p.target) out.target.push_back(convert(b));
  for (const auto& b : p.fuse) out.fuse.push_back(convert(b));
  for (const auto& b : p.select) out.select.push_back(convert(b));
  return out;
}

}  // namespace refdic
