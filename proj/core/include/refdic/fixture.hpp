// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "refdic/corpus.hpp"
#include "refdic/embeddings.hpp"
#include "refdic/region_features.hpp"
#include "refdic/scene_graph.hpp"

namespace refdic {

// Knobs for the deterministic desk-scale fixture. Every value drawn during
// generation comes from one UniformBits stream, so equal specs give
// byte-identical outputs.
struct FixtureSpec {
  int images = 50;
  int captions_per_image = 5;
  std::uint32_t embedding_dim = 32;
  int regions_per_image = 6;
  std::uint32_t feature_dim = 16;
  std::uint64_t seed = 1;
};

struct Fixture {
  CaptionCorpus corpus;
  Lexicon lexicon;
  EmbeddingStore embeddings;
  std::vector<RegionFeatureSet> features;
};

Fixture generate_fixture(const FixtureSpec& spec);

// Deterministic stand-in for learned text embeddings: tokens hash (FNV-1a
// 64) into dimensions, counts are L2-normalized; an image vector is the
// normalized sum of its caption vectors.
std::vector<float> bag_of_words_vector(const TokenSequence& seq,
                                       std::uint32_t dim);
EmbeddingStore bag_of_words_embeddings(const CaptionCorpus& corpus,
                                       std::uint32_t dim);

std::string corpus_to_json(const CaptionCorpus& corpus);

// {"candidates":[{"image_id":id,"caption":"..."}]}; caption 0 of each image.
std::string first_caption_candidates_json(const CaptionCorpus& corpus);

}  // namespace refdic
