// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <json.hpp>

#include "refdic/errors.hpp"
#include "refdic/io_util.hpp"

namespace refdic {

std::vector<CoarseEntry> coarse_group(ImageId target,
                                      const CaptionCorpus& corpus,
                                      const EmbeddingStore& emb,
                                      int coarse_size) {
  if (coarse_size < 1) throw DomainError("coarse_group: coarse_size must be >= 1");
  const ImageEntry& target_entry = corpus.at(target);
  const std::vector<float>& target_vec = emb.image_vector(target);

  struct CaptionScore {
    double score;
    ImageId id;
    std::uint32_t caption_index;
  };
  std::vector<CaptionScore> scored;
  for (const auto& img : corpus.images()) {
    if (img.id == target || img.split != target_entry.split) continue;
    for (std::uint32_t c = 0; c < img.captions.size(); ++c) {
      double s = cosine_similarity(target_vec, emb.caption_vector(img.id, c));
      scored.push_back({s, img.id, c});
    }
  }
  if (scored.empty()) {
    throw InsufficientCandidatesError(
        "coarse_group: no candidate captions for target " +
            std::to_string(target),
        1, 0);
  }
  // Highest score first; ties by ascending id then caption index so the
  // cutoff is deterministic.
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.id, a.caption_index) < std::tie(b.id, b.caption_index);
  });
  if (scored.size() > static_cast<std::size_t>(coarse_size)) {
    scored.resize(static_cast<std::size_t>(coarse_size));
  }
  // Dedup to images; the first occurrence carries the maximum caption score.
  std::vector<CoarseEntry> result;
  std::unordered_map<ImageId, char> seen;
  for (const auto& cs : scored) {
    if (seen.emplace(cs.id, 1).second) result.push_back({cs.id, cs.score});
  }
  std::sort(result.begin(), result.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return result;
}

std::vector<FineEntry> fine_rank(ImageId target,
                                 const std::vector<CoarseEntry>& coarse,
                                 const std::map<ImageId, SceneGraph>& graphs) {
  auto target_it = graphs.find(target);
  if (target_it == graphs.end()) {
    throw LookupError("fine_rank: missing scene graph for target " +
                      std::to_string(target));
  }
  std::vector<FineEntry> ranked;
  ranked.reserve(coarse.size());
  for (const auto& entry : coarse) {
    auto it = graphs.find(entry.id);
    if (it == graphs.end()) {
      throw LookupError("fine_rank: missing scene graph for image " +
                        std::to_string(entry.id));
    }
    ranked.push_back({entry.id, overlap(target_it->second, it->second).total,
                      entry.score});
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.overlap_total != b.overlap_total) {
      return a.overlap_total > b.overlap_total;
    }
    if (a.coarse_score != b.coarse_score) return a.coarse_score > b.coarse_score;
    return a.id < b.id;
  });
  return ranked;
}

ReferenceGroup select_window(ImageId target,
                             const std::vector<FineEntry>& ranked, int p,
                             int k) {
  if (p < 1 || k < 1) throw DomainError("select_window: p and k must be >= 1");
  const std::size_t needed = static_cast<std::size_t>(p) + k - 1;
  if (ranked.size() < needed) {
    throw InsufficientCandidatesError(
        "select_window: ranking too short for target " + std::to_string(target),
        needed, ranked.size());
  }
  ReferenceGroup group;
  group.target = target;
  group.p = p;
  group.k = k;
  for (int rank = p; rank <= p + k - 1; ++rank) {
    const FineEntry& entry = ranked[static_cast<std::size_t>(rank - 1)];
    group.members.push_back(entry.id);
    group.coarse_scores.push_back(entry.coarse_score);
    group.fine_scores.push_back(entry.overlap_total);
  }
  return group;
}

ReferenceGroup build_group(ImageId target, const CaptionCorpus& corpus,
                           const EmbeddingStore& emb,
                           const std::map<ImageId, SceneGraph>& graphs,
                           int coarse_size, int p, int k) {
  auto coarse = coarse_group(target, corpus, emb, coarse_size);
  auto ranked = fine_rank(target, coarse, graphs);
  return select_window(target, ranked, p, k);
}

double group_overlap_stats(const std::vector<ReferenceGroup>& groups,
                           const std::map<ImageId, SceneGraph>& graphs) {
  if (groups.empty()) {
    throw DomainError("group_overlap_stats: mean of zero groups is undefined");
  }
  double sum_of_means = 0;
  for (const auto& group : groups) {
    if (group.members.empty()) {
      throw DomainError("group_overlap_stats: group for target " +
                        std::to_string(group.target) + " has no members");
    }
    auto target_it = graphs.find(group.target);
    if (target_it == graphs.end()) {
      throw LookupError("group_overlap_stats: missing graph for target " +
                        std::to_string(group.target));
    }
    double sum = 0;
    for (ImageId member : group.members) {
      auto it = graphs.find(member);
      if (it == graphs.end()) {
        throw LookupError("group_overlap_stats: missing graph for image " +
                          std::to_string(member));
      }
      sum += overlap(target_it->second, it->second).total;
    }
    sum_of_means += sum / static_cast<double>(group.members.size());
  }
  return sum_of_means / static_cast<double>(groups.size());
}

std::string groups_to_json(const std::vector<ReferenceGroup>& groups) {
  nlohmann::json doc;
  auto& arr = doc["groups"] = nlohmann::json::array();
  for (const auto& group : groups) {
    nlohmann::json g;
    g["target"] = group.target;
    g["members"] = group.members;
    g["fine_scores"] = group.fine_scores;
    g["coarse_scores"] = group.coarse_scores;
    g["p"] = group.p;
    g["k"] = group.k;
    arr.push_back(std::move(g));
  }
  return doc.dump(2) + "\n";
}

std::vector<ReferenceGroup> parse_groups_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("groups JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("groups") || !doc["groups"].is_array()) {
    throw SchemaError("groups JSON: expected top-level {\"groups\": [...]}");
  }
  std::vector<ReferenceGroup> groups;
  for (const auto& g : doc["groups"]) {
    ReferenceGroup group;
    if (!g.contains("target") || !g["target"].is_number_unsigned()) {
      throw SchemaError("groups JSON: target must be an unsigned integer");
    }
    group.target = g["target"].get<ImageId>();
    if (!g.contains("members") || !g["members"].is_array()) {
      throw SchemaError("groups JSON: members must be an array");
    }
    for (const auto& m : g["members"]) group.members.push_back(m.get<ImageId>());
    if (g.contains("fine_scores")) {
      for (const auto& s : g["fine_scores"]) {
        group.fine_scores.push_back(s.get<int>());
      }
    }
    if (g.contains("coarse_scores")) {
      for (const auto& s : g["coarse_scores"]) {
        group.coarse_scores.push_back(s.get<double>());
      }
    }
    group.p = g.value("p", 0);
    group.k = g.value("k", static_cast<int>(group.members.size()));
    if (group.members.size() != static_cast<std::size_t>(group.k)) {
      throw SchemaError("groups JSON: group for target " +
                        std::to_string(group.target) + " has " +
                        std::to_string(group.members.size()) +
                        " members but k = " + std::to_string(group.k));
    }
    for (ImageId m : group.members) {
      if (m == group.target) {
        throw SchemaError("groups JSON: target " + std::to_string(group.target) +
                          " appears among its own members");
      }
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

std::vector<ReferenceGroup> load_groups(const std::string& path) {
  return parse_groups_json(io::read_file(path));
}

}  // namespace refdic
