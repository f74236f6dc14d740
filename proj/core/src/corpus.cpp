// Copyright the refdic authors. Licensed under the terms of the Apache 2.0
// license. See LICENSE in the project root.

#include "refdic/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "refdic/errors.hpp"

namespace refdic {

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw SchemaError("unknown split \"" + name + "\"");
}

namespace {

// Decodes one UTF-8 codepoint starting at i; advances i. Invalid bytes are
// passed through as their byte value so tokenization stays total.
char32_t next_codepoint(const std::string& s, std::size_t& i) {
  const auto byte = [&](std::size_t k) -> unsigned {
    return static_cast<unsigned char>(s[k]);
  };
  unsigned b0 = byte(i);
  std::size_t len = 1;
  char32_t cp = b0;
  if (b0 >= 0xF0 && b0 <= 0xF4) {
    len = 4;
    cp = b0 & 0x07u;
  } else if (b0 >= 0xE0) {
    len = 3;
    cp = b0 & 0x0Fu;
  } else if (b0 >= 0xC2) {
    len = 2;
    cp = b0 & 0x1Fu;
  } else if (b0 >= 0x80) {
    ++i;
    return b0;  // stray continuation byte
  }
  if (len == 1) {
    ++i;
    return cp;
  }
  if (i + len > s.size()) {
    ++i;
    return b0;
  }
  for (std::size_t k = 1; k < len; ++k) {
    unsigned bk = byte(i + k);
    if ((bk & 0xC0u) != 0x80u) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3Fu);
  }
  i += len;
  return cp;
}

bool is_whitespace_codepoint(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
    case 0x00A0: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

char32_t lower_codepoint(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  // Latin-1 uppercase letters, skipping the multiplication sign.
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

bool is_punctuation_codepoint(char32_t cp) {
  if (cp <= 0x7E) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B);
  }
  // Latin-1 punctuation and signs, general punctuation, CJK symbols and
  // punctuation, and the fullwidth ASCII-punctuation mirrors.
  if (cp >= 0x00A1 && cp <= 0x00BF) return true;
  if (cp >= 0x2000 && cp <= 0x206F) return true;
  if (cp >= 0x3000 && cp <= 0x303F) return true;
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;
  if (cp >= 0xFF1A && cp <= 0xFF20) return true;
  if (cp >= 0xFF3B && cp <= 0xFF40) return true;
  if (cp >= 0xFF5B && cp <= 0xFF65) return true;
  return false;
}

TokenSequence tokenize(const std::string& caption) {
  TokenSequence tokens;
  std::string current;
  std::size_t i = 0;
  while (i < caption.size()) {
    char32_t cp = next_codepoint(caption, i);
    if (is_whitespace_codepoint(cp) || is_punctuation_codepoint(cp)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    append_utf8(current, lower_codepoint(cp));
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  if (tokens.empty()) {
    throw EmptyCaptionError("caption normalizes to zero tokens: \"" + caption +
                            "\"");
  }
  return tokens;
}

NGramBag extract_ngrams(const TokenSequence& seq, int max_n) {
  if (max_n < 1) throw DomainError("extract_ngrams: max_n must be >= 1");
  NGramBag bag;
  bag.by_n.resize(static_cast<std::size_t>(max_n));
  const std::size_t len = seq.size();
  for (int n = 1; n <= max_n; ++n) {
    if (len < static_cast<std::size_t>(n)) break;
    auto& counts = bag.by_n[static_cast<std::size_t>(n - 1)];
    for (std::size_t start = 0; start + n <= len; ++start) {
      std::string key = seq[start];
      for (std::size_t k = 1; k < static_cast<std::size_t>(n); ++k) {
        key += ' ';
        key += seq[start + k];
      }
      ++counts[key];
    }
  }
  return bag;
}

CaptionCorpus::CaptionCorpus(std::vector<ImageEntry> entries)
    : images_(std::move(entries)) {
  index_.reserve(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) {
    auto& img = images_[i];
    if (img.captions.empty()) {
      throw SchemaError("image " + std::to_string(img.id) +
                        " has no captions");
    }
    if (!index_.emplace(img.id, i).second) {
      throw SchemaError("duplicate image id " + std::to_string(img.id));
    }
    if (img.token_seqs.size() != img.captions.size()) {
      img.token_seqs.clear();
      img.token_seqs.reserve(img.captions.size());
      for (const auto& caption : img.captions) {
        try {
          img.token_seqs.push_back(tokenize(caption));
        } catch (const EmptyCaptionError&) {
          throw EmptyCaptionError("image " + std::to_string(img.id) +
                                  ": caption normalizes to zero tokens: \"" +
                                  caption + "\"");
        }
      }
    }
  }
}

const ImageEntry& CaptionCorpus::at(ImageId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw LookupError("unknown image id " + std::to_string(id));
  }
  return images_[it->second];
}

std::vector<ImageId> CaptionCorpus::split_members(Split split) const {
  std::vector<ImageId> ids;
  for (const auto& img : images_) {
    if (img.split == split) ids.push_back(img.id);
  }
  return ids;
}

CaptionCorpus parse_corpus_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("caption JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    throw SchemaError("caption JSON: expected top-level {\"images\": [...]}");
  }
  std::vector<ImageEntry> entries;
  entries.reserve(doc["images"].size());
  for (const auto& item : doc["images"]) {
    if (!item.is_object()) throw SchemaError("caption JSON: image entry must be an object");
    if (!item.contains("id") || !item["id"].is_number_unsigned()) {
      throw SchemaError("caption JSON: image id must be an unsigned integer");
    }
    if (!item.contains("split") || !item["split"].is_string()) {
      throw SchemaError("caption JSON: image split must be a string");
    }
    if (!item.contains("captions") || !item["captions"].is_array() ||
        item["captions"].empty()) {
      throw SchemaError("caption JSON: captions must be a non-empty array");
    }
    ImageEntry entry;
    entry.id = item["id"].get<ImageId>();
    entry.split = split_from_string(item["split"].get<std::string>());
    for (const auto& cap : item["captions"]) {
      if (!cap.is_string()) {
        throw SchemaError("caption JSON: captions must be strings (image " +
                          std::to_string(entry.id) + ")");
      }
      entry.captions.push_back(cap.get<std::string>());
    }
    entries.push_back(std::move(entry));
  }
  return CaptionCorpus(std::move(entries));
}

CaptionCorpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open caption file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus_json(buf.str());
}

}  // namespace refdic
