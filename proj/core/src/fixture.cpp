// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/fixture.hpp"

#include <array>
#include <cmath>

#include <json.hpp>

#include "refdic/errors.hpp"
#include "refdic/rng.hpp"

namespace refdic {

namespace {

const std::vector<std::string> kNouns = {
    "couch",  "room",   "dog",    "cat",    "bus",       "car",
    "train",  "helmet", "motorcycle", "road", "towel",   "toilet",
    "curtain", "table", "vase",   "fireplace", "bench",  "kitchen",
    "person", "tree"};

const std::vector<std::string> kAdjectives = {
    "red",  "blue",  "green", "black", "white", "yellow",
    "wooden", "small", "large", "dirty", "pink", "striped"};

// surface -> canonical
const std::vector<std::pair<std::string, std::string>> kSynonyms = {
    {"sofa", "couch"},   {"automobile", "car"}, {"puppy", "dog"},
    {"kitten", "cat"},   {"crimson", "red"},    {"tiny", "small"},
    {"filthy", "dirty"}, {"rider", "person"}};

const std::vector<std::string> kConnectives = {"on", "near", "with", "beside"};

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string plural(const std::string& noun) {
  if (noun.ends_with('s') || noun.ends_with("sh") || noun.ends_with("ch")) {
    return noun + "es";
  }
  return noun + "s";
}

// Canonical noun/adjective rendered as one of its surface forms.
std::string surface_form(const std::string& canonical, bool noun,
                         UniformBits& rng) {
  const double roll = rng.next_unit();
  if (noun && roll < 0.15) return plural(canonical);
  if (roll >= 0.15 && roll < 0.30) {
    for (const auto& [surface, target] : kSynonyms) {
      if (target == canonical) return surface;
    }
  }
  return canonical;
}

}  // namespace

Fixture generate_fixture(const FixtureSpec& spec) {
  if (spec.images < 2) throw DomainError("fixture: need at least 2 images");
  if (spec.captions_per_image < 1 || spec.regions_per_image < 1 ||
      spec.embedding_dim < 1 || spec.feature_dim < 1) {
    throw DomainError("fixture: counts and dimensions must be >= 1");
  }
  UniformBits rng(spec.seed);

  Fixture fixture;
  fixture.lexicon.nouns.insert(kNouns.begin(), kNouns.end());
  fixture.lexicon.adjectives.insert(kAdjectives.begin(), kAdjectives.end());
  for (const auto& [surface, canonical] : kSynonyms) {
    fixture.lexicon.synonyms.emplace(surface, canonical);
  }

  std::vector<ImageEntry> entries;
  entries.reserve(static_cast<std::size_t>(spec.images));
  std::vector<std::array<std::size_t, 3>> themes;
  for (int i = 0; i < spec.images; ++i) {
    // Theme: three distinct nouns; captions describe theme nouns with an
    // image-specific adjective, so theme sharing drives both embedding
    // similarity and scene-graph overlap.
    std::array<std::size_t, 3> theme{};
    theme[0] = rng.next_below(kNouns.size());
    do {
      theme[1] = rng.next_below(kNouns.size());
    } while (theme[1] == theme[0]);
    do {
      theme[2] = rng.next_below(kNouns.size());
    } while (theme[2] == theme[0] || theme[2] == theme[1]);
    themes.push_back(theme);

    std::array<std::size_t, 3> adjective_of{};
    for (auto& a : adjective_of) a = rng.next_below(kAdjectives.size());

    ImageEntry entry;
    entry.id = static_cast<ImageId>(i + 1);
    const int train_count = (spec.images * 3) / 5;
    const int val_count = (spec.images - train_count) / 2;
    if (i < train_count) {
      entry.split = Split::kTrain;
    } else if (i < train_count + val_count) {
      entry.split = Split::kVal;
    } else {
      entry.split = Split::kTest;
    }

    for (int c = 0; c < spec.captions_per_image; ++c) {
      const std::size_t first = rng.next_below(3);
      std::size_t second;
      do {
        second = rng.next_below(3);
      } while (second == first);
      std::string caption = "a ";
      if (rng.next_unit() < 0.8) {
        caption += kAdjectives[adjective_of[first]] + " ";
      }
      caption += surface_form(kNouns[theme[first]], true, rng);
      caption += " " + kConnectives[rng.next_below(kConnectives.size())] + " a ";
      if (rng.next_unit() < 0.8) {
        caption += kAdjectives[adjective_of[second]] + " ";
      }
      caption += surface_form(kNouns[theme[second]], true, rng);
      caption += ".";
      entry.captions.push_back(std::move(caption));
    }
    entries.push_back(std::move(entry));
  }
  fixture.corpus = CaptionCorpus(std::move(entries));
  fixture.embeddings =
      bag_of_words_embeddings(fixture.corpus, spec.embedding_dim);

  for (int i = 0; i < spec.images; ++i) {
    RegionFeatureSet set;
    set.id = static_cast<ImageId>(i + 1);
    set.regions = static_cast<std::uint32_t>(spec.regions_per_image);
    set.dim = spec.feature_dim;
    set.data.resize(static_cast<std::size_t>(set.regions) * set.dim, 0.0f);
    for (int r = 0; r < spec.regions_per_image; ++r) {
      float* row = set.data.data() +
                   static_cast<std::size_t>(r) * spec.feature_dim;
      const auto& noun = kNouns[themes[static_cast<std::size_t>(i)]
                                      [static_cast<std::size_t>(r % 3)]];
      row[fnv1a64(noun) % spec.feature_dim] += 1.0f;
      for (std::uint32_t c = 0; c < spec.feature_dim; ++c) {
        row[c] += static_cast<float>(rng.next_symmetric(0.25));
      }
    }
    fixture.features.push_back(std::move(set));
  }
  return fixture;
}

std::vector<float> bag_of_words_vector(const TokenSequence& seq,
                                       std::uint32_t dim) {
  std::vector<float> vec(dim, 0.0f);
  for (const auto& token : seq) {
    vec[fnv1a64(token) % dim] += 1.0f;
  }
  double norm = 0;
  for (float v : vec) norm += static_cast<double>(v) * v;
  if (norm > 0) {
    const float inv = static_cast<float>(1.0 / std::sqrt(norm));
    for (auto& v : vec) v *= inv;
  }
  return vec;
}

EmbeddingStore bag_of_words_embeddings(const CaptionCorpus& corpus,
                                       std::uint32_t dim) {
  EmbeddingStore store(dim);
  for (const auto& img : corpus.images()) {
    std::vector<float> image_vec(dim, 0.0f);
    for (std::uint32_t c = 0; c < img.token_seqs.size(); ++c) {
      std::vector<float> cap_vec = bag_of_words_vector(img.token_seqs[c], dim);
      for (std::uint32_t k = 0; k < dim; ++k) image_vec[k] += cap_vec[k];
      store.put_caption(img.id, c, std::move(cap_vec));
    }
    double norm = 0;
    for (float v : image_vec) norm += static_cast<double>(v) * v;
    if (norm > 0) {
      const float inv = static_cast<float>(1.0 / std::sqrt(norm));
      for (auto& v : image_vec) v *= inv;
    }
    store.put_image(img.id, std::move(image_vec));
  }
  return store;
}

std::string corpus_to_json(const CaptionCorpus& corpus) {
  nlohmann::json doc;
  auto& arr = doc["images"] = nlohmann::json::array();
  for (const auto& img : corpus.images()) {
    nlohmann::json e;
    e["id"] = img.id;
    e["split"] = to_string(img.split);
    e["captions"] = img.captions;
    arr.push_back(std::move(e));
  }
  return doc.dump(2) + "\n";
}

std::string first_caption_candidates_json(const CaptionCorpus& corpus) {
  nlohmann::json doc;
  auto& arr = doc["candidates"] = nlohmann::json::array();
  for (const auto& img : corpus.images()) {
    arr.push_back({{"image_id", img.id}, {"caption", img.captions.front()}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace refdic
