// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "refdic/corpus.hpp"

namespace refdic {

// Precomputed image and caption vectors keyed by image id. Sub-index 0 in
// the file is the image vector; sub-index i >= 1 is caption i-1.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::uint32_t dim = 0) : dim_(dim) {}

  std::uint32_t dim() const { return dim_; }
  std::size_t item_count() const { return count_; }

  void put_image(ImageId id, std::vector<float> vec);
  void put_caption(ImageId id, std::uint32_t caption_index,
                   std::vector<float> vec);

  const std::vector<float>& image_vector(ImageId id) const;
  const std::vector<float>& caption_vector(ImageId id,
                                           std::uint32_t caption_index) const;
  bool has_image(ImageId id) const { return images_.count(id) != 0; }

  const std::unordered_map<ImageId, std::vector<float>>& images() const {
    return images_;
  }
  const std::unordered_map<
      ImageId, std::unordered_map<std::uint32_t, std::vector<float>>>&
  captions() const {
    return captions_;
  }

 private:
  void check_dim(const std::vector<float>& vec) const;

  std::uint32_t dim_;
  std::size_t count_ = 0;
  std::unordered_map<ImageId, std::vector<float>> images_;
  std::unordered_map<ImageId,
                     std::unordered_map<std::uint32_t, std::vector<float>>>
      captions_;
};

// Binary layout ("RDICFT01"):
//   magic, u32 item count, u32 dimension D,
//   per item: u64 id, u64 sub-index, D x f32, all little-endian.
std::string embeddings_to_bytes(const EmbeddingStore& store);
EmbeddingStore embeddings_from_bytes(const std::string& bytes);
EmbeddingStore load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingStore& store, const std::string& path);

// Cosine similarity in double precision; zero-norm inputs score 0.
double cosine_similarity(const std::vector<float>& a,
                         const std::vector<float>& b);

}  // namespace refdic
