// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/scene_graph.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "refdic/errors.hpp"

namespace refdic {

void Lexicon::validate() const {
  for (const auto& [surface, canonical] : synonyms) {
    if (nouns.count(canonical) == 0 && adjectives.count(canonical) == 0) {
      throw SchemaError("lexicon: synonym target \"" + canonical +
                        "\" (for \"" + surface +
                        "\") is neither a noun nor an adjective");
    }
  }
}

namespace {

enum class WordKind { kNoun, kAdjective };

struct Resolved {
  WordKind kind;
  std::string canonical;
};

// Synonym-map then classify; nouns win over adjectives when a word is both.
std::optional<Resolved> classify(const Lexicon& lex, const std::string& word) {
  auto syn = lex.synonyms.find(word);
  const std::string& canonical = syn == lex.synonyms.end() ? word : syn->second;
  if (lex.nouns.count(canonical)) return Resolved{WordKind::kNoun, canonical};
  if (lex.adjectives.count(canonical)) {
    return Resolved{WordKind::kAdjective, canonical};
  }
  return std::nullopt;
}

// Tries the token as-is, then with "-es" stripped, then with "-s" stripped.
std::optional<Resolved> resolve(const Lexicon& lex, const std::string& token) {
  if (auto hit = classify(lex, token)) return hit;
  if (token.size() > 2 && token.ends_with("es")) {
    if (auto hit = classify(lex, token.substr(0, token.size() - 2))) return hit;
  }
  if (token.size() > 1 && token.ends_with('s')) {
    if (auto hit = classify(lex, token.substr(0, token.size() - 1))) return hit;
  }
  return std::nullopt;
}

}  // namespace

SceneGraph parse_graph(const std::vector<TokenSequence>& captions,
                       const Lexicon& lex) {
  SceneGraph graph;
  for (const auto& caption : captions) {
    std::set<std::string> adjective_run;
    for (const auto& token : caption) {
      auto hit = resolve(lex, token);
      if (!hit) {
        adjective_run.clear();
        continue;
      }
      if (hit->kind == WordKind::kAdjective) {
        adjective_run.insert(hit->canonical);
        continue;
      }
      auto& attrs = graph.entries[hit->canonical];
      attrs.insert(adjective_run.begin(), adjective_run.end());
      adjective_run.clear();
    }
  }
  return graph;
}

OverlapScore overlap(const SceneGraph& a, const SceneGraph& b) {
  OverlapScore score;
  for (const auto& [object, attrs_a] : a.entries) {
    auto it = b.entries.find(object);
    if (it == b.entries.end()) continue;
    ++score.object_overlaps;
    for (const auto& attr : attrs_a) {
      if (it->second.count(attr)) ++score.attribute_overlaps;
    }
  }
  score.total = score.object_overlaps + score.attribute_overlaps;
  return score;
}

Lexicon parse_lexicon_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("lexicon JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw SchemaError("lexicon JSON: expected an object");
  Lexicon lex;
  const auto read_words = [&](const char* key,
                              std::unordered_set<std::string>& out) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw SchemaError(std::string("lexicon JSON: \"") + key +
                        "\" must be an array of strings");
    }
    for (const auto& word : doc[key]) {
      if (!word.is_string()) {
        throw SchemaError(std::string("lexicon JSON: \"") + key +
                          "\" must contain only strings");
      }
      out.insert(word.get<std::string>());
    }
  };
  read_words("nouns", lex.nouns);
  read_words("adjectives", lex.adjectives);
  if (doc.contains("synonyms")) {
    if (!doc["synonyms"].is_object()) {
      throw SchemaError("lexicon JSON: \"synonyms\" must be an object");
    }
    for (const auto& [surface, canonical] : doc["synonyms"].items()) {
      if (!canonical.is_string()) {
        throw SchemaError("lexicon JSON: synonym targets must be strings");
      }
      lex.synonyms.emplace(surface, canonical.get<std::string>());
    }
  }
  lex.validate();
  return lex;
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open lexicon file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lexicon_json(buf.str());
}

std::string lexicon_to_json(const Lexicon& lex) {
  nlohmann::json doc;
  std::vector<std::string> nouns(lex.nouns.begin(), lex.nouns.end());
  std::vector<std::string> adjectives(lex.adjectives.begin(),
                                      lex.adjectives.end());
  std::sort(nouns.begin(), nouns.end());
  std::sort(adjectives.begin(), adjectives.end());
  doc["nouns"] = nouns;
  doc["adjectives"] = adjectives;
  auto& synonyms = doc["synonyms"] = nlohmann::json::object();
  std::map<std::string, std::string> ordered(lex.synonyms.begin(),
                                             lex.synonyms.end());
  for (const auto& [surface, canonical] : ordered) synonyms[surface] = canonical;
  return doc.dump(2) + "\n";
}

std::string graphs_to_json(const std::map<ImageId, SceneGraph>& graphs) {
  nlohmann::json doc;
  auto& arr = doc["graphs"] = nlohmann::json::array();
  for (const auto& [id, graph] : graphs) {
    nlohmann::json g;
    g["image_id"] = id;
    auto& entries = g["entries"] = nlohmann::json::array();
    for (const auto& [object, attrs] : graph.entries) {
      nlohmann::json e;
      e["object"] = object;
      e["attributes"] = std::vector<std::string>(attrs.begin(), attrs.end());
      entries.push_back(std::move(e));
    }
    arr.push_back(std::move(g));
  }
  return doc.dump(2) + "\n";
}

std::map<ImageId, SceneGraph> parse_graphs_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("graph JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("graphs") || !doc["graphs"].is_array()) {
    throw SchemaError("graph JSON: expected top-level {\"graphs\": [...]}");
  }
  std::map<ImageId, SceneGraph> graphs;
  for (const auto& g : doc["graphs"]) {
    if (!g.contains("image_id") || !g["image_id"].is_number_unsigned()) {
      throw SchemaError("graph JSON: image_id must be an unsigned integer");
    }
    ImageId id = g["image_id"].get<ImageId>();
    if (graphs.count(id)) {
      throw SchemaError("graph JSON: duplicate image_id " + std::to_string(id));
    }
    SceneGraph graph;
    if (!g.contains("entries") || !g["entries"].is_array()) {
      throw SchemaError("graph JSON: entries must be an array");
    }
    for (const auto& e : g["entries"]) {
      if (!e.contains("object") || !e["object"].is_string() ||
          !e.contains("attributes") || !e["attributes"].is_array()) {
        throw SchemaError("graph JSON: entry needs object + attributes");
      }
      auto& attrs = graph.entries[e["object"].get<std::string>()];
      for (const auto& a : e["attributes"]) {
        if (!a.is_string()) {
          throw SchemaError("graph JSON: attributes must be strings");
        }
        attrs.insert(a.get<std::string>());
      }
    }
    graphs.emplace(id, std::move(graph));
  }
  return graphs;
}

std::map<ImageId, SceneGraph> load_graphs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open graph file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graphs_json(buf.str());
}

}  // namespace refdic
