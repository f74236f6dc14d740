// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/metrics.hpp"

#include <cmath>

#include "refdic/errors.hpp"

namespace refdic {

std::uint32_t IdfTable::df(int n, const std::string& ngram) const {
  if (n < 1 || n > max_n_) return 0;
  const auto& table = df_[static_cast<std::size_t>(n - 1)];
  auto it = table.find(ngram);
  return it == table.end() ? 0 : it->second;
}

double IdfTable::idf(int n, const std::string& ngram) const {
  double guarded = std::max<std::uint32_t>(1, df(n, ngram));
  return std::log(static_cast<double>(corpus_size_) / guarded);
}

IdfTable build_idf(const CaptionCorpus& corpus, Split split, int max_n) {
  std::vector<std::unordered_map<std::string, std::uint32_t>> df(
      static_cast<std::size_t>(max_n));
  std::size_t images = 0;
  for (const auto& img : corpus.images()) {
    if (img.split != split) continue;
    ++images;
    // Union of n-grams over all captions of this image: df counts images.
    NGramBag merged;
    merged.by_n.resize(static_cast<std::size_t>(max_n));
    for (const auto& seq : img.token_seqs) {
      NGramBag bag = extract_ngrams(seq, max_n);
      for (std::size_t i = 0; i < bag.by_n.size(); ++i) {
        for (const auto& [ngram, count] : bag.by_n[i]) {
          merged.by_n[i][ngram] += count;
        }
      }
    }
    for (std::size_t i = 0; i < merged.by_n.size(); ++i) {
      for (const auto& [ngram, count] : merged.by_n[i]) {
        (void)count;
        ++df[i][ngram];
      }
    }
  }
  if (images == 0) {
    throw DomainError(std::string("build_idf: split \"") + to_string(split) +
                      "\" contains no images");
  }
  return IdfTable(std::move(df), images, max_n);
}

void DisciderParams::validate() const {
  if (n_param <= 0) throw DomainError("discider: parameter n must be > 0");
  if (k < 0) throw DomainError("discider: group size K must be >= 0");
  if (m + k <= 0) throw DomainError("discider: m + K must be > 0");
}

double irf(int count, const DisciderParams& params) {
  params.validate();
  if (count < 0 || count > params.k) {
    throw DomainError("irf: count must lie in [0, K]");
  }
  return std::log((params.m + params.k) / (params.n_param + count));
}

WeightedNGramVector tfidf_vector(const TokenSequence& seq,
                                 const IdfTable& idf) {
  const int max_n = idf.max_n();
  WeightedNGramVector vec;
  vec.by_n.resize(static_cast<std::size_t>(max_n));
  NGramBag bag = extract_ngrams(seq, max_n);
  for (int n = 1; n <= max_n; ++n) {
    const auto& counts = bag.by_n[static_cast<std::size_t>(n - 1)];
    if (counts.empty()) continue;
    double total = 0;
    for (const auto& [ngram, count] : counts) total += count;
    auto& weights = vec.by_n[static_cast<std::size_t>(n - 1)];
    for (const auto& [ngram, count] : counts) {
      weights[ngram] = (count / total) * idf.idf(n, ngram);
    }
  }
  return vec;
}

namespace {

double cosine(const std::map<std::string, double>& a,
              const std::map<std::string, double>& b) {
  double dot = 0, norm_a = 0, norm_b = 0;
  for (const auto& [ngram, wa] : a) {
    norm_a += wa * wa;
    auto it = b.find(ngram);
    if (it != b.end()) dot += wa * it->second;
  }
  for (const auto& [ngram, wb] : b) norm_b += wb * wb;
  if (norm_a == 0 || norm_b == 0) return 0.0;
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

double mean_cosine_score(const WeightedNGramVector& cand,
                         const std::vector<WeightedNGramVector>& refs,
                         int max_n) {
  double sum_over_n = 0;
  for (int n = 1; n <= max_n; ++n) {
    double acc = 0;
    for (const auto& ref : refs) {
      acc += cosine(cand.by_n[static_cast<std::size_t>(n - 1)],
                    ref.by_n[static_cast<std::size_t>(n - 1)]);
    }
    sum_over_n += acc / static_cast<double>(refs.size());
  }
  return 10.0 * sum_over_n / max_n;
}

// Number of reference images whose captions contain the n-gram:
// sum over images of min(1, occurrences within the image).
std::vector<std::unordered_map<std::string, int>> reference_counts(
    const std::vector<std::vector<TokenSequence>>& group_refs, int max_n) {
  std::vector<std::unordered_map<std::string, int>> counts(
      static_cast<std::size_t>(max_n));
  for (const auto& image_captions : group_refs) {
    NGramBag merged;
    merged.by_n.resize(static_cast<std::size_t>(max_n));
    for (const auto& seq : image_captions) {
      NGramBag bag = extract_ngrams(seq, max_n);
      for (std::size_t i = 0; i < bag.by_n.size(); ++i) {
        for (const auto& [ngram, c] : bag.by_n[i]) merged.by_n[i][ngram] += c;
      }
    }
    for (std::size_t i = 0; i < merged.by_n.size(); ++i) {
      for (const auto& [ngram, c] : merged.by_n[i]) {
        (void)c;
        ++counts[i][ngram];
      }
    }
  }
  return counts;
}

}  // namespace

double cider(const TokenSequence& candidate,
             const std::vector<TokenSequence>& refs, const IdfTable& idf) {
  if (refs.empty()) throw DomainError("cider: reference list is empty");
  WeightedNGramVector cand = tfidf_vector(candidate, idf);
  std::vector<WeightedNGramVector> ref_vecs;
  ref_vecs.reserve(refs.size());
  for (const auto& ref : refs) ref_vecs.push_back(tfidf_vector(ref, idf));
  return mean_cosine_score(cand, ref_vecs, idf.max_n());
}

double discider(const TokenSequence& candidate,
                const std::vector<TokenSequence>& target_refs,
                const std::vector<std::vector<TokenSequence>>& group_refs,
                const IdfTable& idf, const DisciderParams& params) {
  params.validate();
  if (target_refs.empty()) {
    throw DomainError("discider: target reference list is empty");
  }
  if (group_refs.size() != static_cast<std::size_t>(params.k)) {
    throw DomainError("discider: group size " +
                      std::to_string(group_refs.size()) +
                      " does not match K = " + std::to_string(params.k));
  }
  const int max_n = idf.max_n();
  auto counts = reference_counts(group_refs, max_n);

  WeightedNGramVector cand = tfidf_vector(candidate, idf);
  std::vector<WeightedNGramVector> gt_vecs;
  gt_vecs.reserve(target_refs.size());
  for (const auto& ref : target_refs) {
    WeightedNGramVector vec = tfidf_vector(ref, idf);
    for (int n = 1; n <= max_n; ++n) {
      auto& weights = vec.by_n[static_cast<std::size_t>(n - 1)];
      const auto& cnt = counts[static_cast<std::size_t>(n - 1)];
      for (auto& [ngram, weight] : weights) {
        auto it = cnt.find(ngram);
        weight *= irf(it == cnt.end() ? 0 : it->second, params);
      }
    }
    gt_vecs.push_back(std::move(vec));
  }
  return mean_cosine_score(cand, gt_vecs, max_n);
}

}  // namespace refdic
