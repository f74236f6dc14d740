// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.
//
// refdic: reference-based distinctive captioning toolkit.
//
// Subcommands: gen-fixture, parse, build-groups, score, match-regions,
// encode, loss-demo. All outputs are machine-readable JSON or documented
// binary files written atomically; progress lines go to stdout. Exit codes:
// 0 success, 1 computation failure, 2 usage or schema failure.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "refdic/corpus.hpp"
#include "refdic/embeddings.hpp"
#include "refdic/encoder.hpp"
#include "refdic/errors.hpp"
#include "refdic/fixture.hpp"
#include "refdic/grouping.hpp"
#include "refdic/io_util.hpp"
#include "refdic/losses.hpp"
#include "refdic/metrics.hpp"
#include "refdic/model_params.hpp"
#include "refdic/parallel.hpp"
#include "refdic/region_match.hpp"
#include "refdic/scene_graph.hpp"

namespace {

using namespace refdic;

double round6(double x) { return std::round(x * 1e6) / 1e6; }

struct GenFixtureOpts {
  std::string out_dir;
  FixtureSpec spec;
  int d = 32;
  int heads = 4;
  int l_t = 3;
  int l_fs = 3;
  int d_ff = 64;
};

void run_gen_fixture(const GenFixtureOpts& opts) {
  std::filesystem::create_directories(opts.out_dir);
  Fixture fixture = generate_fixture(opts.spec);
  const std::filesystem::path dir(opts.out_dir);

  io::write_file_atomic((dir / "captions.json").string(),
                        corpus_to_json(fixture.corpus));
  io::write_file_atomic((dir / "lexicon.json").string(),
                        lexicon_to_json(fixture.lexicon));
  io::write_file_atomic((dir / "embeddings.bin").string(),
                        embeddings_to_bytes(fixture.embeddings));
  io::write_file_atomic((dir / "features.bin").string(),
                        region_features_to_bytes(fixture.features));
  io::write_file_atomic((dir / "candidates.json").string(),
                        first_caption_candidates_json(fixture.corpus));

  EncoderConfig config;
  config.d = opts.d;
  config.h = opts.heads;
  config.l_t = opts.l_t;
  config.l_fs = opts.l_fs;
  config.d_ff = opts.d_ff;
  ModelParams params = init_model_params(
      static_cast<int>(opts.spec.feature_dim), config, opts.spec.seed);
  save_model_params(params, (dir / "params.bin").string(), /*f64=*/true);

  std::cout << "fixture: " << fixture.corpus.size() << " images, "
            << opts.spec.captions_per_image << " captions each -> "
            << opts.out_dir << "\n";
}

struct ParseOpts {
  std::string captions_path;
  std::string lexicon_path;
  std::string out_path;
};

void run_parse(const ParseOpts& opts) {
  CaptionCorpus corpus = load_corpus(opts.captions_path);
  Lexicon lexicon = load_lexicon(opts.lexicon_path);
  std::map<ImageId, SceneGraph> graphs;
  for (const auto& img : corpus.images()) {
    graphs.emplace(img.id, parse_graph(img.token_seqs, lexicon));
  }
  io::write_file_atomic(opts.out_path, graphs_to_json(graphs));
  std::cout << "parsed " << graphs.size() << " scene graphs -> "
            << opts.out_path << "\n";
}

struct BuildGroupsOpts {
  std::string captions_path;
  std::string embeddings_path;
  std::string graphs_path;
  std::string out_path;
  int coarse_size = 500;
  int p = 3;
  int k = 5;
};

void run_build_groups(const BuildGroupsOpts& opts) {
  CaptionCorpus corpus = load_corpus(opts.captions_path);
  EmbeddingStore embeddings = load_embeddings(opts.embeddings_path);
  std::map<ImageId, SceneGraph> graphs = load_graphs(opts.graphs_path);

  struct Outcome {
    std::optional<ReferenceGroup> group;
    std::string error;
  };
  std::vector<Outcome> outcomes(corpus.size());
  const auto& images = corpus.images();
  parallel_for(images.size(), configured_threads(), [&](std::size_t i) {
    try {
      outcomes[i].group =
          build_group(images[i].id, corpus, embeddings, graphs,
                      opts.coarse_size, opts.p, opts.k);
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });

  std::vector<ReferenceGroup> groups;
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].group) {
      groups.push_back(std::move(*outcomes[i].group));
    } else {
      failures.push_back("target " + std::to_string(images[i].id) + ": " +
                         outcomes[i].error);
    }
  }
  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << f << "\n";
    throw LookupError("build-groups failed for " +
                      std::to_string(failures.size()) + " target(s)");
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.target < b.target; });
  io::write_file_atomic(opts.out_path, groups_to_json(groups));
  std::cout << "built " << groups.size() << " groups (coarse_size="
            << opts.coarse_size << ", p=" << opts.p << ", k=" << opts.k
            << ") -> " << opts.out_path << "\n";
}

struct ScoreOpts {
  std::string captions_path;
  std::string groups_path;
  std::string candidates_path;
  std::string out_path;
  double m = 0.8;
  double n = 5.0;
};

void run_score(const ScoreOpts& opts) {
  CaptionCorpus corpus = load_corpus(opts.captions_path);
  std::vector<ReferenceGroup> group_list = load_groups(opts.groups_path);
  std::map<ImageId, const ReferenceGroup*> groups;
  for (const auto& g : group_list) {
    if (!groups.emplace(g.target, &g).second) {
      throw SchemaError("groups JSON: duplicate group for target " +
                        std::to_string(g.target));
    }
  }

  nlohmann::json cand_doc;
  try {
    cand_doc = nlohmann::json::parse(io::read_file(opts.candidates_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("candidates JSON: ") + e.what(), e.byte);
  }
  if (!cand_doc.is_object() || !cand_doc.contains("candidates") ||
      !cand_doc["candidates"].is_array()) {
    throw SchemaError("candidates JSON: expected {\"candidates\": [...]}");
  }

  struct Candidate {
    ImageId id;
    TokenSequence tokens;
  };
  std::vector<Candidate> candidates;
  for (const auto& c : cand_doc["candidates"]) {
    if (!c.contains("image_id") || !c["image_id"].is_number_unsigned() ||
        !c.contains("caption") || !c["caption"].is_string()) {
      throw SchemaError("candidates JSON: entries need image_id + caption");
    }
    candidates.push_back({c["image_id"].get<ImageId>(),
                          tokenize(c["caption"].get<std::string>())});
  }

  // One IDF table per split; a candidate is scored against the split of
  // its target image.
  std::map<Split, IdfTable> idf_by_split;
  for (const auto& cand : candidates) {
    const Split split = corpus.at(cand.id).split;  // validates the image id
    if (!idf_by_split.count(split)) {
      idf_by_split.emplace(split, build_idf(corpus, split));
    }
  }

  struct Row {
    ImageId id = 0;
    double cider_score = 0;
    double discider_score = 0;
    std::string error;
  };
  std::vector<Row> rows(candidates.size());
  parallel_for(candidates.size(), configured_threads(), [&](std::size_t i) {
    auto& row = rows[i];
    row.id = candidates[i].id;
    try {
      const ImageEntry& target = corpus.at(row.id);
      auto group_it = groups.find(row.id);
      if (group_it == groups.end()) {
        throw LookupError("no reference group for image " +
                          std::to_string(row.id));
      }
      const ReferenceGroup& group = *group_it->second;
      const IdfTable& idf = idf_by_split.at(target.split);

      std::vector<std::vector<TokenSequence>> group_refs;
      for (ImageId member : group.members) {
        group_refs.push_back(corpus.at(member).token_seqs);
      }
      DisciderParams params{opts.m, opts.n, group.k};
      row.cider_score = cider(candidates[i].tokens, target.token_seqs, idf);
      row.discider_score = discider(candidates[i].tokens, target.token_seqs,
                                    group_refs, idf, params);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  nlohmann::json report;
  auto& images = report["images"] = nlohmann::json::array();
  double sum_cider = 0, sum_discider = 0;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      throw LookupError("scoring image " + std::to_string(row.id) + ": " +
                        row.error);
    }
    images.push_back({{"image_id", row.id},
                      {"cider", round6(row.cider_score)},
                      {"discider", round6(row.discider_score)}});
    sum_cider += row.cider_score;
    sum_discider += row.discider_score;
  }
  report["mean_cider"] = round6(sum_cider / static_cast<double>(rows.size()));
  report["mean_discider"] =
      round6(sum_discider / static_cast<double>(rows.size()));
  report["m"] = opts.m;
  report["n"] = opts.n;
  io::write_file_atomic(opts.out_path, report.dump(2) + "\n");
  std::cout << "scored " << rows.size()
            << " candidates: mean cider=" << report["mean_cider"]
            << " discider=" << report["mean_discider"] << " -> "
            << opts.out_path << "\n";
}

// Shared by match-regions and encode: load features, pick the target
// (default: first image in the file), keep the rest as references.
struct FeatureBundle {
  ImageId target_id = 0;
  std::vector<ImageId> ref_ids;
  Matrix<double> target;            // raw features
  std::vector<Matrix<double>> refs;
};

FeatureBundle load_feature_bundle(const std::string& path,
                                  std::optional<ImageId> target) {
  std::vector<RegionFeatureSet> sets = load_region_features(path);
  if (sets.empty()) throw SchemaError("feature file contains no images");
  std::size_t target_index = 0;
  if (target) {
    bool found = false;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (sets[i].id == *target) {
        target_index = i;
        found = true;
        break;
      }
    }
    if (!found) {
      throw LookupError("feature file has no image " + std::to_string(*target));
    }
  }
  FeatureBundle bundle;
  bundle.target_id = sets[target_index].id;
  bundle.target = feature_matrix<double>(sets[target_index]);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (i == target_index) continue;
    bundle.ref_ids.push_back(sets[i].id);
    bundle.refs.push_back(feature_matrix<double>(sets[i]));
  }
  return bundle;
}

struct MatchRegionsOpts {
  std::string features_path;
  std::string params_path;  // empty: match on raw features
  std::string out_path;
  std::optional<ImageId> target;
};

void run_match_regions(const MatchRegionsOpts& opts) {
  FeatureBundle bundle = load_feature_bundle(opts.features_path, opts.target);
  if (bundle.refs.empty()) {
    throw InsufficientCandidatesError("match-regions: need reference images",
                                      1, 0);
  }
  Matrix<double> tgt = bundle.target;
  std::vector<Matrix<double>> refs = bundle.refs;
  if (!opts.params_path.empty()) {
    ModelParams params = load_model_params(opts.params_path);
    tgt = project(tgt, params.projection);
    for (auto& ref : refs) ref = project(ref, params.projection);
  }
  std::vector<TargetReferenceTuple> tuples = build_tuples(tgt, refs);

  nlohmann::json doc;
  doc["target"] = bundle.target_id;
  doc["references"] = bundle.ref_ids;
  auto& arr = doc["tuples"] = nlohmann::json::array();
  for (const auto& tuple : tuples) {
    nlohmann::json t;
    t["target_region"] = tuple.target_region;
    auto& matches = t["matches"] = nlohmann::json::array();
    for (std::size_t k = 0; k < tuple.matches.size(); ++k) {
      matches.push_back({{"image_id", bundle.ref_ids[k]},
                         {"region", tuple.matches[k].region},
                         {"score", round6(tuple.matches[k].score)}});
    }
    arr.push_back(std::move(t));
  }
  io::write_file_atomic(opts.out_path, doc.dump(2) + "\n");
  std::cout << "matched " << tuples.size() << " target regions against "
            << refs.size() << " references -> " << opts.out_path << "\n";
}

struct EncodeOpts {
  std::string features_path;
  std::string params_path;
  std::string out_path;
  std::optional<ImageId> target;
  bool f64 = false;
  bool check_grads = false;
  double epsilon = 1e-5;
  int samples = 200;
  std::string grad_report_path;
};

template <typename T>
std::string encode_output_bytes(const Matrix<T>& out) {
  std::string bytes;
  bytes += "RDICEN01";
  io::append_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(out.rows()));
  io::append_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(out.cols()));
  io::append_le<std::uint8_t>(bytes, static_cast<std::uint8_t>(sizeof(T)));
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      io::append_le<T>(bytes, out(r, c));
    }
  }
  return bytes;
}

void run_encode(const EncodeOpts& opts) {
  FeatureBundle bundle = load_feature_bundle(opts.features_path, opts.target);
  if (bundle.refs.empty()) {
    throw InsufficientCandidatesError("encode: need reference images", 1, 0);
  }
  ModelParams params = load_model_params(opts.params_path);

  if (opts.f64) {
    Matrix<double> m_t = project(bundle.target, params.projection);
    std::vector<Matrix<double>> refs;
    for (const auto& ref : bundle.refs) {
      refs.push_back(project(ref, params.projection));
    }
    Matrix<double> out = encode(m_t, refs, params.encoder, params.config);
    io::write_file_atomic(opts.out_path, encode_output_bytes(out));
    std::cout << "encoded target " << bundle.target_id << ": " << out.rows()
              << "x" << out.cols() << " (f64) -> " << opts.out_path << "\n";

    if (opts.check_grads) {
      GradCheckReport report =
          grad_check(m_t, refs, params.encoder, params.config, opts.epsilon,
                     opts.samples, params.seed + 1);
      nlohmann::json doc;
      doc["max_relative_error"] = report.max_rel_error;
      doc["epsilon"] = opts.epsilon;
      doc["samples"] = nlohmann::json::array();
      for (const auto& s : report.samples) {
        doc["samples"].push_back({{"tensor", s.tensor},
                                  {"index", s.index},
                                  {"analytic", s.analytic},
                                  {"numeric", s.numeric},
                                  {"rel_error", s.rel_error}});
      }
      const std::string report_path = opts.grad_report_path.empty()
                                          ? opts.out_path + ".grads.json"
                                          : opts.grad_report_path;
      io::write_file_atomic(report_path, doc.dump(2) + "\n");
      std::cout << "grad check: max relative error " << report.max_rel_error
                << " over " << report.samples.size() << " samples -> "
                << report_path << "\n";
    }
  } else {
    ProjectionParams<float> proj = to_float(params.projection);
    EncoderParams<float> enc = to_float(params.encoder);
    Matrix<float> m_t = project(Matrix<float>(bundle.target.cast<float>()), proj);
    std::vector<Matrix<float>> refs;
    for (const auto& ref : bundle.refs) {
      refs.push_back(project(Matrix<float>(ref.cast<float>()), proj));
    }
    Matrix<float> out = encode(m_t, refs, enc, params.config);
    io::write_file_atomic(opts.out_path, encode_output_bytes(out));
    std::cout << "encoded target " << bundle.target_id << ": " << out.rows()
              << "x" << out.cols() << " (f32) -> " << opts.out_path << "\n";
  }
}

struct LossDemoOpts {
  std::vector<double> probs = {0.5, 0.25};
  std::vector<double> rewards = {1.0, 0.0};
  std::vector<double> logps = {-1.0, -2.0};
  std::string out_path;
};

void run_loss_demo(const LossDemoOpts& opts) {
  if (opts.rewards.size() != opts.logps.size()) {
    throw DomainError("loss-demo: --rewards and --logps need equal lengths");
  }
  SampledCaptionBatch batch;
  for (std::size_t i = 0; i < opts.rewards.size(); ++i) {
    batch.push_back({opts.logps[i], opts.rewards[i]});
  }
  nlohmann::json doc;
  doc["xe_loss"] = xe_loss(opts.probs);
  doc["rl_loss"] = rl_loss(batch);
  const std::string text = doc.dump(2) + "\n";
  if (opts.out_path.empty()) {
    std::cout << text;
  } else {
    io::write_file_atomic(opts.out_path, text);
    std::cout << "loss demo -> " << opts.out_path << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reference-based distinctive captioning toolkit"};
  app.require_subcommand(1);

  GenFixtureOpts gen;
  auto* gen_cmd = app.add_subcommand(
      "gen-fixture", "generate a deterministic mini-corpus with embeddings, "
                     "region features and encoder parameters");
  gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
  gen_cmd->add_option("--images", gen.spec.images, "image count");
  gen_cmd->add_option("--captions", gen.spec.captions_per_image,
                      "captions per image");
  gen_cmd->add_option("--dim", gen.spec.embedding_dim, "embedding dimension");
  gen_cmd->add_option("--regions", gen.spec.regions_per_image,
                      "regions per image");
  gen_cmd->add_option("--feat-dim", gen.spec.feature_dim,
                      "region feature dimension");
  gen_cmd->add_option("--seed", gen.spec.seed, "generator seed");
  gen_cmd->add_option("--d", gen.d, "encoder model dimension");
  gen_cmd->add_option("--heads", gen.heads, "attention heads");
  gen_cmd->add_option("--lt", gen.l_t, "target flow depth");
  gen_cmd->add_option("--lfs", gen.l_fs, "fuse/select depth");
  gen_cmd->add_option("--dff", gen.d_ff, "feed-forward width");

  ParseOpts parse_opts;
  auto* parse_cmd =
      app.add_subcommand("parse", "parse captions into scene graphs");
  parse_cmd->add_option("--captions", parse_opts.captions_path)->required();
  parse_cmd->add_option("--lexicon", parse_opts.lexicon_path)->required();
  parse_cmd->add_option("--out", parse_opts.out_path)->required();

  BuildGroupsOpts bg;
  auto* bg_cmd = app.add_subcommand(
      "build-groups", "two-stage reference group construction");
  bg_cmd->add_option("--captions", bg.captions_path)->required();
  bg_cmd->add_option("--embeddings", bg.embeddings_path)->required();
  bg_cmd->add_option("--graphs", bg.graphs_path)->required();
  bg_cmd->add_option("--out", bg.out_path)->required();
  bg_cmd->add_option("--coarse-size", bg.coarse_size,
                     "captions kept in the coarse stage");
  bg_cmd->add_option("--p", bg.p, "window start rank (1-indexed)");
  bg_cmd->add_option("--k", bg.k, "group size");

  ScoreOpts score_opts;
  auto* score_cmd = app.add_subcommand(
      "score", "per-image CIDEr and DisCIDEr against reference groups");
  score_cmd->add_option("--captions", score_opts.captions_path)->required();
  score_cmd->add_option("--groups", score_opts.groups_path)->required();
  score_cmd->add_option("--candidates", score_opts.candidates_path)->required();
  score_cmd->add_option("--out", score_opts.out_path)->required();
  score_cmd->add_option("--m", score_opts.m, "DisCIDEr m parameter");
  score_cmd->add_option("--n", score_opts.n, "DisCIDEr n parameter");

  MatchRegionsOpts mr;
  auto* mr_cmd = app.add_subcommand(
      "match-regions", "per-target-region argmax matching dump");
  mr_cmd->add_option("--features", mr.features_path)->required();
  mr_cmd->add_option("--params", mr.params_path,
                     "project through the model's memory layer first");
  mr_cmd->add_option("--out", mr.out_path)->required();
  ImageId mr_target = 0;
  auto* mr_target_opt = mr_cmd->add_option("--target", mr_target,
                                           "target image id (default: first)");

  EncodeOpts enc;
  auto* enc_cmd =
      app.add_subcommand("encode", "two-flow encoder forward pass");
  enc_cmd->add_option("--features", enc.features_path)->required();
  enc_cmd->add_option("--params", enc.params_path)->required();
  enc_cmd->add_option("--out", enc.out_path)->required();
  ImageId enc_target = 0;
  auto* enc_target_opt = enc_cmd->add_option("--target", enc_target,
                                             "target image id (default: first)");
  enc_cmd->add_flag("--f64", enc.f64, "compute in 64-bit");
  enc_cmd->add_flag("--check-grads", enc.check_grads,
                    "verify analytic gradients with central differences");
  enc_cmd->add_option("--eps", enc.epsilon, "finite-difference step");
  enc_cmd->add_option("--samples", enc.samples, "sampled parameter count");
  enc_cmd->add_option("--grad-report", enc.grad_report_path,
                      "gradient report path (default: <out>.grads.json)");

  LossDemoOpts loss;
  auto* loss_cmd = app.add_subcommand(
      "loss-demo", "evaluate the XE and RL loss kernels on supplied values");
  loss_cmd->add_option("--probs", loss.probs, "per-step probabilities")
      ->delimiter(',');
  loss_cmd->add_option("--rewards", loss.rewards, "sampled-caption rewards")
      ->delimiter(',');
  loss_cmd->add_option("--logps", loss.logps,
                       "sampled-caption log-probabilities")
      ->delimiter(',');
  loss_cmd->add_option("--out", loss.out_path,
                       "write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_cmd->parsed()) {
      run_gen_fixture(gen);
    } else if (parse_cmd->parsed()) {
      run_parse(parse_opts);
    } else if (bg_cmd->parsed()) {
      run_build_groups(bg);
    } else if (score_cmd->parsed()) {
      run_score(score_opts);
    } else if (mr_cmd->parsed()) {
      if (mr_target_opt->count() > 0) mr.target = mr_target;
      run_match_regions(mr);
    } else if (enc_cmd->parsed()) {
      if (enc_target_opt->count() > 0) enc.target = enc_target;
      if (enc.check_grads && !enc.f64) {
        std::cerr << "encode: --check-grads requires --f64\n";
        return 2;
      }
      run_encode(enc);
    } else if (loss_cmd->parsed()) {
      run_loss_demo(loss);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
