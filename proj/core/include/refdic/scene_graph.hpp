// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "refdic/corpus.hpp"

namespace refdic {

// Word lists driving the deterministic caption parser. Synonyms map a
// surface form onto a canonical noun or adjective in one step.
struct Lexicon {
  std::unordered_set<std::string> nouns;
  std::unordered_set<std::string> adjectives;
  std::unordered_map<std::string, std::string> synonyms;

  // Throws SchemaError when a synonym target is neither a noun nor an
  // adjective.
  void validate() const;
};

Lexicon load_lexicon(const std::string& path);
Lexicon parse_lexicon_json(const std::string& text);
std::string lexicon_to_json(const Lexicon& lex);

// Bag of (object -> attribute set) entries for one image, unioned over all
// of its captions. Objects and attributes are canonical lexicon forms.
struct SceneGraph {
  std::map<std::string, std::set<std::string>> entries;

  bool operator==(const SceneGraph&) const = default;
};

struct OverlapScore {
  int object_overlaps = 0;
  int attribute_overlaps = 0;
  int total = 0;

  bool operator==(const OverlapScore&) const = default;
};

// Scans each caption for maximal ADJ* NOUN runs over the lexicon, after
// one-step synonym mapping and -es/-s plural stripping. A token that is
// both noun and adjective counts as a noun and terminates the run.
SceneGraph parse_graph(const std::vector<TokenSequence>& captions,
                       const Lexicon& lex);

// Object overlaps count object categories present in both graphs.
// Attribute overlaps count (object, attribute) pairs present in both, so
// an attribute shared across different objects never counts.
OverlapScore overlap(const SceneGraph& a, const SceneGraph& b);

// Graph dump schema:
//   {"graphs":[{"image_id":<uint>,
//               "entries":[{"object":"...","attributes":["...", ...]}]}]}
std::string graphs_to_json(const std::map<ImageId, SceneGraph>& graphs);
std::map<ImageId, SceneGraph> parse_graphs_json(const std::string& text);
std::map<ImageId, SceneGraph> load_graphs(const std::string& path);

}  // namespace refdic
