// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include <doctest.h>

#include <string>
#include <utility>
#include <vector>

#include "refdic/corpus.hpp"
#include "refdic/errors.hpp"
#include "refdic/fixture.hpp"
#include "refdic/rng.hpp"

using namespace refdic;

TEST_CASE("tokenize lowercases and strips punctuation") {
  CHECK(tokenize("A red Couch.") == TokenSequence{"a", "red", "couch"});
  CHECK(tokenize("two-tone bus, stopped") ==
        TokenSequence{"two", "tone", "bus", "stopped"});
  CHECK(tokenize("  Hello,   WORLD!! ") == TokenSequence{"hello", "world"});
  CHECK(tokenize("don't") == TokenSequence{"don", "t"});
  // curly quotes and em dash are Unicode punctuation
  CHECK(tokenize("“nice”—view") == TokenSequence{"nice", "view"});
}

TEST_CASE("tokenize rejects captions that normalize to nothing") {
  CHECK_THROWS_AS(tokenize("   "), EmptyCaptionError);
  CHECK_THROWS_AS(tokenize("..,!?"), EmptyCaptionError);
  CHECK_THROWS_AS(tokenize(""), EmptyCaptionError);
}

namespace {

// Character-class oracle: classify every codepoint independently and build
// the expected token list by replacing separators with spaces.
TokenSequence oracle_tokenize(const std::string& caption) {
  // Only ASCII and the explicitly listed ranges appear in the fuzz corpus.
  std::string normalized;
  for (std::size_t i = 0; i < caption.size();) {
    unsigned char c = static_cast<unsigned char>(caption[i]);
    if (c < 0x80) {
      const bool punct = (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
                         (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
      const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                         c == '\f' || c == '\v';
      if (punct || space) {
        normalized += ' ';
      } else {
        normalized += static_cast<char>(
            c >= 'A' && c <= 'Z' ? c + 32 : c);
      }
      ++i;
    } else {
      // The fuzz corpus inserts only these multi-byte codepoints.
      static const std::vector<std::pair<std::string, bool>> known = {
          {"’", true},  {"“", true}, {"—", true},
          {"¿", true},  {"é", false}, {"ö", false}};
      bool matched = false;
      for (const auto& [bytes, is_punct] : known) {
        if (caption.compare(i, bytes.size(), bytes) == 0) {
          if (is_punct) {
            normalized += ' ';
          } else {
            normalized += bytes;
          }
          i += bytes.size();
          matched = true;
          break;
        }
      }
      REQUIRE(matched);
    }
  }
  TokenSequence tokens;
  std::string cur;
  for (char c : normalized) {
    if (c == ' ') {
      if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

std::string join(const TokenSequence& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

TEST_CASE("tokenize agrees with a character-class oracle on fuzzed strings") {
  const std::vector<std::string> pieces = {
      "Cat",  "dog",   "RED",  "bus,", "7th",  "a",     "’", "“",
      "—", "¿", "café", "töne", "x.y", "(z)", "end!"};
  UniformBits rng(77);
  int nonempty = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::string caption;
    const int parts = 1 + static_cast<int>(rng.next_below(6));
    for (int p = 0; p < parts; ++p) {
      caption += pieces[rng.next_below(pieces.size())];
      caption += rng.next_unit() < 0.7 ? " " : "";
    }
    TokenSequence expected = oracle_tokenize(caption);
    if (expected.empty()) {
      CHECK_THROWS_AS(tokenize(caption), EmptyCaptionError);
      continue;
    }
    ++nonempty;
    CHECK(tokenize(caption) == expected);
  }
  CHECK(nonempty > 100);
}

TEST_CASE("tokenize is idempotent") {
  UniformBits rng(123);
  const std::vector<std::string> pieces = {"A", "red-ish", "COUCH!", "42",
                                           "in", "the", "room.", "two-tone"};
  for (int trial = 0; trial < 100; ++trial) {
    std::string caption;
    const int parts = 1 + static_cast<int>(rng.next_below(8));
    for (int p = 0; p < parts; ++p) {
      caption += pieces[rng.next_below(pieces.size())] + " ";
    }
    TokenSequence once = tokenize(caption);
    CHECK(tokenize(join(once)) == once);
  }
}

TEST_CASE("extract_ngrams counts sliding windows") {
  NGramBag bag = extract_ngrams({"a", "red", "couch"});
  CHECK(bag.by_n[1].size() == 2);
  CHECK(bag.by_n[1].at("a red") == 1);
  CHECK(bag.by_n[1].at("red couch") == 1);

  NGramBag rep = extract_ngrams({"a", "a", "a"});
  CHECK(rep.by_n[0].at("a") == 3);
  CHECK(rep.by_n[1].at("a a") == 2);

  NGramBag six = extract_ngrams({"t1", "t2", "t3", "t4", "t5", "t6"});
  std::size_t four_gram_total = 0;
  for (const auto& [g, c] : six.by_n[3]) four_gram_total += c;
  CHECK(four_gram_total == 3);
}

TEST_CASE("ngram totals satisfy the window-count invariant") {
  UniformBits rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    TokenSequence seq;
    const std::size_t len = rng.next_below(9);
    for (std::size_t i = 0; i < len; ++i) {
      seq.push_back("w" + std::to_string(rng.next_below(4)));
    }
    NGramBag bag = extract_ngrams(seq, 4);
    for (int n = 1; n <= 4; ++n) {
      std::size_t total = 0;
      for (const auto& [g, c] : bag.by_n[static_cast<std::size_t>(n - 1)]) {
        CHECK(c >= 1);
        total += c;
      }
      const std::size_t expected =
          len + 1 >= static_cast<std::size_t>(n) ? len - n + 1 : 0;
      CHECK(total == expected);
    }
  }
}

TEST_CASE("corpus JSON loads images in file order") {
  const std::string text = R"({"images":[
    {"id": 9, "split": "train", "captions": ["a dog", "a cat", "a bus", "a car", "a tree"]},
    {"id": 2, "split": "val", "captions": ["one couch", "two couches", "red couch", "old couch", "a couch"]}
  ]})";
  CaptionCorpus corpus = parse_corpus_json(text);
  CHECK(corpus.size() == 2);
  CHECK(corpus.images()[0].id == 9);
  CHECK(corpus.images()[1].id == 2);
  CHECK(corpus.images()[0].captions.size() == 5);
  CHECK(corpus.at(2).split == Split::kVal);
  CHECK(corpus.at(9).token_seqs[0] == TokenSequence{"a", "dog"});
  CHECK_THROWS_AS(corpus.at(7), LookupError);
}

TEST_CASE("corpus JSON rejects duplicate ids naming the id") {
  const std::string text = R"({"images":[
    {"id": 7, "split": "train", "captions": ["a dog"]},
    {"id": 7, "split": "train", "captions": ["a cat"]}
  ]})";
  CHECK_THROWS_WITH_AS(parse_corpus_json(text), "duplicate image id 7",
                       SchemaError);
}

TEST_CASE("corpus JSON surfaces parse and schema errors") {
  CHECK_THROWS_AS(parse_corpus_json("{nope"), ParseError);
  CHECK_THROWS_AS(parse_corpus_json(R"({"images": 4})"), SchemaError);
  CHECK_THROWS_AS(
      parse_corpus_json(R"({"images":[{"id":-2,"split":"train","captions":["x"]}]})"),
      SchemaError);
  CHECK_THROWS_AS(
      parse_corpus_json(R"({"images":[{"id":1,"split":"dev","captions":["x"]}]})"),
      SchemaError);
  CHECK_THROWS_AS(
      parse_corpus_json(R"({"images":[{"id":1,"split":"train","captions":[]}]})"),
      SchemaError);
  CHECK_THROWS_AS(
      parse_corpus_json(R"({"images":[{"id":1,"split":"train","captions":["..."]}]})"),
      EmptyCaptionError);
}

TEST_CASE("generated 50-image fixture round-trips through the JSON loader") {
  FixtureSpec spec;
  Fixture fixture = generate_fixture(spec);
  const std::string text = corpus_to_json(fixture.corpus);
  // Independent count: occurrences of the id key in the serialized file.
  std::size_t ids = 0;
  for (std::size_t pos = text.find("\"id\":"); pos != std::string::npos;
       pos = text.find("\"id\":", pos + 1)) {
    ++ids;
  }
  CHECK(ids == 50);
  CaptionCorpus loaded = parse_corpus_json(text);
  CHECK(loaded.size() == 50);
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded.images()[i].id == fixture.corpus.images()[i].id);
    CHECK(loaded.images()[i].captions == fixture.corpus.images()[i].captions);
  }
}
