// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "refdic/errors.hpp"
#include "refdic/io_util.hpp"

namespace refdic {

namespace {
constexpr char kMagic[] = "RDICFT01";
}

void EmbeddingStore::check_dim(const std::vector<float>& vec) const {
  if (vec.size() != dim_) {
    throw DimensionError("embedding vector has dimension " +
                         std::to_string(vec.size()) + ", store expects " +
                         std::to_string(dim_));
  }
  for (float v : vec) {
    if (!std::isfinite(v)) {
      throw DomainError("embedding vector contains a non-finite entry");
    }
  }
}

void EmbeddingStore::put_image(ImageId id, std::vector<float> vec) {
  check_dim(vec);
  if (!images_.emplace(id, std::move(vec)).second) {
    throw SchemaError("duplicate image vector for id " + std::to_string(id));
  }
  ++count_;
}

void EmbeddingStore::put_caption(ImageId id, std::uint32_t caption_index,
                                 std::vector<float> vec) {
  check_dim(vec);
  if (!captions_[id].emplace(caption_index, std::move(vec)).second) {
    throw SchemaError("duplicate caption vector for id " + std::to_string(id) +
                      " index " + std::to_string(caption_index));
  }
  ++count_;
}

const std::vector<float>& EmbeddingStore::image_vector(ImageId id) const {
  auto it = images_.find(id);
  if (it == images_.end()) {
    throw LookupError("missing image embedding for id " + std::to_string(id));
  }
  return it->second;
}

const std::vector<float>& EmbeddingStore::caption_vector(
    ImageId id, std::uint32_t caption_index) const {
  auto img = captions_.find(id);
  if (img != captions_.end()) {
    auto it = img->second.find(caption_index);
    if (it != img->second.end()) return it->second;
  }
  throw LookupError("missing caption embedding for id " + std::to_string(id) +
                    " caption " + std::to_string(caption_index));
}

std::string embeddings_to_bytes(const EmbeddingStore& store) {
  // Items sorted by (id, sub-index) so serialization is reproducible.
  std::vector<std::tuple<ImageId, std::uint64_t, const std::vector<float>*>>
      items;
  items.reserve(store.item_count());
  for (const auto& [id, vec] : store.images()) {
    items.emplace_back(id, 0, &vec);
  }
  for (const auto& [id, by_index] : store.captions()) {
    for (const auto& [index, vec] : by_index) {
      items.emplace_back(id, static_cast<std::uint64_t>(index) + 1, &vec);
    }
  }
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) {
              return std::tie(std::get<0>(a), std::get<1>(a)) <
                     std::tie(std::get<0>(b), std::get<1>(b));
            });
  std::string out;
  out.reserve(16 + items.size() * (16 + store.dim() * 4));
  out += kMagic;
  io::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(items.size()));
  io::append_le<std::uint32_t>(out, store.dim());
  for (const auto& [id, sub, vec] : items) {
    io::append_le<std::uint64_t>(out, id);
    io::append_le<std::uint64_t>(out, sub);
    for (float v : *vec) io::append_le<float>(out, v);
  }
  return out;
}

void save_embeddings(const EmbeddingStore& store, const std::string& path) {
  io::write_file_atomic(path, embeddings_to_bytes(store));
}

EmbeddingStore load_embeddings(const std::string& path) {
  return embeddings_from_bytes(io::read_file(path));
}

EmbeddingStore embeddings_from_bytes(const std::string& bytes) {
  io::Reader reader(bytes, "embedding file");
  reader.expect_magic(kMagic);
  const auto count = reader.read<std::uint32_t>();
  const auto dim = reader.read<std::uint32_t>();
  if (dim == 0) throw SchemaError("embedding file: dimension must be >= 1");
  EmbeddingStore store(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto id = reader.read<std::uint64_t>();
    const auto sub = reader.read<std::uint64_t>();
    std::vector<float> vec(dim);
    for (auto& v : vec) v = reader.read<float>();
    if (sub == 0) {
      store.put_image(id, std::move(vec));
    } else {
      store.put_caption(id, static_cast<std::uint32_t>(sub - 1),
                        std::move(vec));
    }
  }
  if (!reader.exhausted()) {
    throw SchemaError("embedding file: trailing bytes after item " +
                      std::to_string(count));
  }
  return store;
}

double cosine_similarity(const std::vector<float>& a,
                         const std::vector<float>& b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine_similarity: dimension mismatch");
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace refdic
