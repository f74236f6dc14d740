// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "refdic/corpus.hpp"

namespace refdic {

// Per-order document frequencies over one corpus split. df(w) counts the
// images whose ground-truth captions contain the n-gram at least once.
class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::vector<std::unordered_map<std::string, std::uint32_t>> df,
           std::size_t corpus_size, int max_n)
      : df_(std::move(df)), corpus_size_(corpus_size), max_n_(max_n) {}

  std::size_t corpus_size() const { return corpus_size_; }
  int max_n() const { return max_n_; }

  std::uint32_t df(int n, const std::string& ngram) const;

  // ln(|I| / max(1, df)); the guard makes candidate-only n-grams score
  // ln(|I|) instead of dividing by zero.
  double idf(int n, const std::string& ngram) const;

 private:
  std::vector<std::unordered_map<std::string, std::uint32_t>> df_;
  std::size_t corpus_size_ = 0;
  int max_n_ = 4;
};

IdfTable build_idf(const CaptionCorpus& corpus, Split split, int max_n = 4);

struct DisciderParams {
  double m = 0.8;
  double n_param = 5.0;
  int k = 5;

  void validate() const;
};

// Sparse TF-IDF weights per n-gram order; g_d may go negative once the
// reference-frequency factor is applied.
struct WeightedNGramVector {
  std::vector<std::map<std::string, double>> by_n;
};

WeightedNGramVector tfidf_vector(const TokenSequence& seq, const IdfTable& idf);

// Inverse reference frequency: ln((m + K) / (n_param + count)) where count
// is the number of reference images whose captions contain the n-gram.
double irf(int count, const DisciderParams& params);

// Consensus score: per order n, mean cosine between the candidate TF-IDF
// vector and each reference TF-IDF vector (cosine with a zero vector is 0),
// then 10 x the mean over n in 1..4.
double cider(const TokenSequence& candidate,
             const std::vector<TokenSequence>& refs, const IdfTable& idf);

// Same as cider except every ground-truth weight is additionally scaled by
// irf(count); the candidate vector keeps plain TF-IDF. group_refs holds the
// captions of each of the K reference images.
double discider(const TokenSequence& candidate,
                const std::vector<TokenSequence>& target_refs,
                const std::vector<std::vector<TokenSequence>>& group_refs,
                const IdfTable& idf, const DisciderParams& params);

}  // namespace refdic
