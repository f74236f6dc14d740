// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace refdic {

using ImageId = std::uint64_t;

enum class Split { kTrain, kVal, kTest };

const char* to_string(Split split);
Split split_from_string(const std::string& name);

// Ordered list of lowercase word tokens. Tokens never contain punctuation
// or whitespace and are never empty.
using TokenSequence = std::vector<std::string>;

// Normalizes a raw caption: lowercase, punctuation replaced by spaces,
// split on whitespace. No stemming. Throws EmptyCaptionError when nothing
// survives normalization. The punctuation table is documented in the README.
TokenSequence tokenize(const std::string& caption);

// True when the codepoint is treated as punctuation by tokenize().
bool is_punctuation_codepoint(char32_t cp);

// Per-order n-gram occurrence counts for one token sequence. Keys are the
// n tokens joined with a single space; by_n[i] holds the (i+1)-grams.
struct NGramBag {
  std::vector<std::unordered_map<std::string, std::uint32_t>> by_n;

  std::size_t max_n() const { return by_n.size(); }
};

NGramBag extract_ngrams(const TokenSequence& seq, int max_n = 4);

struct ImageEntry {
  ImageId id = 0;
  Split split = Split::kTrain;
  std::vector<std::string> captions;       // raw strings, M >= 1
  std::vector<TokenSequence> token_seqs;   // tokenize(captions[i])
};

// Immutable after load; iteration order equals file order.
class CaptionCorpus {
 public:
  CaptionCorpus() = default;

  // Validates invariants (unique id, M >= 1, captions tokenize non-empty)
  // and takes ownership of the entries.
  explicit CaptionCorpus(std::vector<ImageEntry> entries);

  const std::vector<ImageEntry>& images() const { return images_; }
  std::size_t size() const { return images_.size(); }

  bool contains(ImageId id) const { return index_.count(id) != 0; }
  const ImageEntry& at(ImageId id) const;

  // Ids of every image in the split, in file order.
  std::vector<ImageId> split_members(Split split) const;

 private:
  std::vector<ImageEntry> images_;
  std::unordered_map<ImageId, std::size_t> index_;
};

// Parses the caption JSON schema:
//   {"images":[{"id":<uint>,"split":"train"|"val"|"test",
//               "captions":["...", ...]}, ...]}
// Malformed JSON throws ParseError with a byte offset; schema violations
// throw SchemaError; a caption that normalizes to zero tokens throws
// EmptyCaptionError.
CaptionCorpus load_corpus(const std::string& path);
CaptionCorpus parse_corpus_json(const std::string& text);

}  // namespace refdic
