// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include <doctest.h>

#include <cmath>

#include "naive_metrics.hpp"
#include "refdic/errors.hpp"
#include "refdic/fixture.hpp"
#include "refdic/metrics.hpp"
#include "refdic/rng.hpp"

using namespace refdic;
using refdic::testing::oracle_cider;
using refdic::testing::oracle_discider;

namespace {

CaptionCorpus corpus_from(
    const std::vector<std::vector<std::string>>& images,
    Split split = Split::kTrain) {
  std::vector<ImageEntry> entries;
  for (std::size_t i = 0; i < images.size(); ++i) {
    ImageEntry e;
    e.id = static_cast<ImageId>(i + 1);
    e.split = split;
    e.captions = images[i];
    entries.push_back(std::move(e));
  }
  return CaptionCorpus(std::move(entries));
}

testing::CorpusCaptions captions_of(const CaptionCorpus& corpus) {
  testing::CorpusCaptions out;
  for (const auto& img : corpus.images()) out.push_back(img.token_seqs);
  return out;
}

}  // namespace

TEST_CASE("idf counts images, not captions") {
  CaptionCorpus corpus = corpus_from({{"a dog", "a dog runs"}, {"a cat"}});
  IdfTable idf = build_idf(corpus, Split::kTrain);
  CHECK(idf.corpus_size() == 2);
  CHECK(idf.df(1, "a") == 2);
  CHECK(idf.df(1, "dog") == 1);  // two mentions, one image
  CHECK(idf.idf(1, "a") == doctest::Approx(0.0));
  CHECK(idf.idf(1, "dog") == doctest::Approx(std::log(2.0)));
  // absent n-gram: guarded to ln |I|
  CHECK(idf.idf(1, "zebra") == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(build_idf(corpus, Split::kTest), DomainError);
}

TEST_CASE("irf evaluates ln((m+K)/(n+count)) at the published defaults") {
  DisciderParams params;  // m = 0.8, n = 5.0, k = 5
  CHECK(irf(0, params) == std::log((0.8 + 5) / (5.0 + 0)));
  CHECK(irf(3, params) == std::log((0.8 + 5) / (5.0 + 3)));
  CHECK(irf(5, params) == std::log((0.8 + 5) / (5.0 + 5)));
  // frozen decimal values of the three quotients
  CHECK(irf(0, params) == doctest::Approx(0.14842000511827322).epsilon(1e-12));
  CHECK(irf(3, params) == doctest::Approx(-0.32158362412746233).epsilon(1e-12));
  CHECK(irf(5, params) == doctest::Approx(-0.5447271754416722).epsilon(1e-12));
  CHECK_THROWS_AS(irf(6, params), DomainError);
  CHECK_THROWS_AS(irf(-1, params), DomainError);
  CHECK_THROWS_AS(irf(0, DisciderParams{0.8, 0.0, 5}), DomainError);
}

TEST_CASE("irf is strictly decreasing in count") {
  UniformBits rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    DisciderParams params;
    params.k = 1 + static_cast<int>(rng.next_below(8));
    params.m = 0.1 + rng.next_unit() * 4.9;
    params.n_param = 0.05 + rng.next_unit() * 10.0;
    for (int count = 0; count < params.k; ++count) {
      CHECK(irf(count, params) > irf(count + 1, params));
    }
  }
}

TEST_CASE("cider is 10 when the candidate matches the only distinct caption") {
  CaptionCorpus corpus =
      corpus_from({{"a red couch in a room"}, {"a dog"}});
  IdfTable idf = build_idf(corpus, Split::kTrain);
  const TokenSequence candidate = corpus.at(1).token_seqs[0];
  CHECK(cider(candidate, corpus.at(1).token_seqs, idf) ==
        doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("cider is 0 without any shared n-gram") {
  CaptionCorpus corpus = corpus_from({{"a red couch"}, {"some dogs outside"}});
  IdfTable idf = build_idf(corpus, Split::kTrain);
  CHECK(cider(corpus.at(1).token_seqs[0], corpus.at(2).token_seqs, idf) ==
        0.0);
  CHECK_THROWS_AS(cider(corpus.at(1).token_seqs[0], {}, idf), DomainError);
}

TEST_CASE("short captions contribute zero for high orders, never NaN") {
  CaptionCorpus corpus = corpus_from({{"red couch"}, {"red dog"}});
  IdfTable idf = build_idf(corpus, Split::kTrain);
  const double score =
      cider(corpus.at(1).token_seqs[0], corpus.at(2).token_seqs, idf);
  CHECK(std::isfinite(score));
  CHECK(score >= 0.0);
}

TEST_CASE("cider matches the brute-force oracle on seeded mini-corpora") {
  const std::vector<std::string> vocab = {"a",    "red",  "couch", "dog",
                                          "room", "cat",  "on",    "big",
                                          "bus",  "road", "tree",  "sits"};
  UniformBits rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<std::string>> images;
    const std::size_t n_images = 2 + rng.next_below(6);
    for (std::size_t i = 0; i < n_images; ++i) {
      std::vector<std::string> captions;
      const std::size_t n_caps = 1 + rng.next_below(3);
      for (std::size_t c = 0; c < n_caps; ++c) {
        std::string caption;
        const std::size_t len = 1 + rng.next_below(7);
        for (std::size_t w = 0; w < len; ++w) {
          caption += vocab[rng.next_below(vocab.size())] + " ";
        }
        captions.push_back(caption);
      }
      images.push_back(std::move(captions));
    }
    CaptionCorpus corpus = corpus_from(images);
    IdfTable idf = build_idf(corpus, Split::kTrain);
    auto corpus_captions = captions_of(corpus);

    const ImageId target = 1 + rng.next_below(corpus.size());
    std::string cand_text;
    for (std::size_t w = 0; w < 4; ++w) {
      cand_text += vocab[rng.next_below(vocab.size())] + " ";
    }
    const TokenSequence candidate = tokenize(cand_text);
    const double got = cider(candidate, corpus.at(target).token_seqs, idf);
    const double expected =
        oracle_cider(candidate, corpus.at(target).token_seqs, corpus_captions);
    CHECK(got == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("discider equals cider when references share nothing") {
  // Reference captions use a disjoint vocabulary, so every ground-truth
  // n-gram has reference count 0 and picks up the same factor; with
  // m + K = 5.8 > n = 5.0 that factor is positive and cancels in cosines.
  CaptionCorpus corpus = corpus_from(
      {{"a red couch in a room", "a couch in a room"},
       {"yellow zebra drinks water", "yellow zebra sleeps"},
       {"purple train waits", "purple train hums"},
       {"green boat floats", "green boat rocks"},
       {"old temple stands", "old temple crumbles"},
       {"new robot beeps", "new robot whirs"}});
  IdfTable idf = build_idf(corpus, Split::kTrain);
  DisciderParams params{0.8, 5.0, 5};
  const TokenSequence candidate = tokenize("a red couch in a room");
  std::vector<std::vector<TokenSequence>> group_refs;
  for (ImageId id = 2; id <= 6; ++id) {
    group_refs.push_back(corpus.at(id).token_seqs);
  }
  const double plain = cider(candidate, corpus.at(1).token_seqs, idf);
  const double dis =
      discider(candidate, corpus.at(1).token_seqs, group_refs, idf, params);
  CHECK(dis == doctest::Approx(plain).epsilon(1e-12));
  CHECK(plain > 0.0);
}

TEST_CASE("reference-frequent n-grams are downweighted against unique ones") {
  DisciderParams params;
  // "red" appears in every reference image, "fireplace" in none.
  CHECK(irf(params.k, params) < irf(0, params));
  CHECK(irf(0, params) > 0.0);  // m + K > n at the published defaults
}

TEST_CASE("discider matches the brute-force oracle") {
  const std::vector<std::string> vocab = {"a",   "red",  "couch", "dog",
                                          "room", "cat", "fireplace", "rug"};
  UniformBits rng(777);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<std::string>> images;
    const std::size_t n_images = 4 + rng.next_below(5);
    for (std::size_t i = 0; i < n_images; ++i) {
      std::vector<std::string> captions;
      const std::size_t n_caps = 1 + rng.next_below(3);
      for (std::size_t c = 0; c < n_caps; ++c) {
        std::string caption;
        const std::size_t len = 2 + rng.next_below(6);
        for (std::size_t w = 0; w < len; ++w) {
          caption += vocab[rng.next_below(vocab.size())] + " ";
        }
        captions.push_back(caption);
      }
      images.push_back(std::move(captions));
    }
    CaptionCorpus corpus = corpus_from(images);
    IdfTable idf = build_idf(corpus, Split::kTrain);
    auto corpus_captions = captions_of(corpus);

    const int k = 3;
    std::vector<std::vector<TokenSequence>> group_refs;
    for (int g = 0; g < k; ++g) {
      group_refs.push_back(corpus.at(2 + g).token_seqs);
    }
    DisciderParams params{0.8, 5.0, k};
    const TokenSequence candidate = corpus.at(1).token_seqs[0];
    const double got = discider(candidate, corpus.at(1).token_seqs, group_refs,
                                idf, params);
    const double expected =
        oracle_discider(candidate, corpus.at(1).token_seqs, group_refs,
                        corpus_captions, params.m, params.n_param);
    CHECK(got == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("discider validates the group size against K") {
  CaptionCorpus corpus = corpus_from({{"a dog"}, {"a cat"}});
  IdfTable idf = build_idf(corpus, Split::kTrain);
  DisciderParams params{0.8, 5.0, 2};
  CHECK_THROWS_AS(discider(corpus.at(1).token_seqs[0], corpus.at(1).token_seqs,
                           {corpus.at(2).token_seqs}, idf, params),
                  DomainError);
}

TEST_CASE("metrics are invariant to reference order") {
  CaptionCorpus corpus = corpus_from(
      {{"a red couch", "a big couch", "the couch sits"}, {"a dog"}});
  IdfTable idf = build_idf(corpus, Split::kTrain);
  const TokenSequence candidate = tokenize("a red couch sits");
  auto refs = corpus.at(1).token_seqs;
  const double base = cider(candidate, refs, idf);
  std::swap(refs[0], refs[2]);
  CHECK(cider(candidate, refs, idf) == doctest::Approx(base).epsilon(1e-15));
}
