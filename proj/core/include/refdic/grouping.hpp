// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "refdic/corpus.hpp"
#include "refdic/embeddings.hpp"
#include "refdic/scene_graph.hpp"

namespace refdic {

struct CoarseEntry {
  ImageId id = 0;
  double score = 0;  // best caption cosine against the target image vector
};

struct FineEntry {
  ImageId id = 0;
  int overlap_total = 0;
  double coarse_score = 0;
};

// K ordered reference images for one target, with the scores that ranked
// them and the selection window.
struct ReferenceGroup {
  ImageId target = 0;
  std::vector<ImageId> members;
  std::vector<double> coarse_scores;
  std::vector<int> fine_scores;
  int p = 3;
  int k = 5;
};

// Stage 1: rank candidate captions within the target's split by cosine
// against the target image vector, keep the coarse_size best captions, and
// deduplicate to images at their maximum caption score. The target's own
// captions are excluded. Ordered by score descending, ties by ascending id.
std::vector<CoarseEntry> coarse_group(ImageId target,
                                      const CaptionCorpus& corpus,
                                      const EmbeddingStore& emb,
                                      int coarse_size = 500);

// Stage 2: re-rank the coarse list by scene-graph overlap with the target.
// Ties break by higher coarse score, then ascending id.
std::vector<FineEntry> fine_rank(ImageId target,
                                 const std::vector<CoarseEntry>& coarse,
                                 const std::map<ImageId, SceneGraph>& graphs);

// Keeps ranks p .. p+k-1 (1-indexed) of the fine ranking.
ReferenceGroup select_window(ImageId target,
                             const std::vector<FineEntry>& ranked, int p = 3,
                             int k = 5);

// Full per-target pipeline: coarse_group -> fine_rank -> select_window.
ReferenceGroup build_group(ImageId target, const CaptionCorpus& corpus,
                           const EmbeddingStore& emb,
                           const std::map<ImageId, SceneGraph>& graphs,
                           int coarse_size = 500, int p = 3, int k = 5);

// Mean over groups of the mean overlap(target, member).total within each
// group. Throws DomainError on an empty group list.
double group_overlap_stats(const std::vector<ReferenceGroup>& groups,
                           const std::map<ImageId, SceneGraph>& graphs);

// Groups JSON:
//   {"groups":[{"target":id,"members":[ids],"fine_scores":[ints],
//               "coarse_scores":[floats],"p":int,"k":int}]}
std::string groups_to_json(const std::vector<ReferenceGroup>& groups);
std::vector<ReferenceGroup> parse_groups_json(const std::string& text);
std::vector<ReferenceGroup> load_groups(const std::string& path);

}  // namespace refdic
