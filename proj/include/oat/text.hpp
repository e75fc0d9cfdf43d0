// Copyright 2026 The OAT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small ASCII text helpers shared by the parser, search, curation and QA.
// Bytes >= 0x80 are treated as word characters so UTF-8 text survives
// tokenization untouched.

#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace oat::text {

inline bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

/// Lowercases, drops apostrophes ("what's" -> "whats") and maps every other
/// non-word byte to a single space. The result has no leading/trailing space.
inline std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char raw : s) {
    auto c = static_cast<unsigned char>(raw);
    if (c == '\'') continue;
    if (is_word_byte(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : raw);
    } else {
      pending_space = true;
    }
  }
  return out;
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

/// normalize() followed by split_words().
inline std::vector<std::string> words(std::string_view s) { return split_words(normalize(s)); }

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Crude singular form: strips one trailing "s" (keeps "ss" endings and short
/// words) and turns "ies" into "y" / "oes" into "o".
inline std::string fold_plural(std::string_view w) {
  std::string s(w);
  if (s.size() > 4 && s.ends_with("ies")) return s.substr(0, s.size() - 3) + "y";
  if (s.size() > 4 && s.ends_with("oes")) return s.substr(0, s.size() - 2);
  if (s.size() > 3 && s.back() == 's' && !s.ends_with("ss") && !s.ends_with("us")) s.pop_back();
  return s;
}

/// True when `needle` occurs in `hay` as a contiguous run of whole words.
inline bool contains_phrase(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

inline bool starts_with_phrase(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  return !needle.empty() && needle.size() <= hay.size() && std::equal(needle.begin(), needle.end(), hay.begin());
}

/// English stopwords used by retrieval and vague-query detection.
inline const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> kStop = {
      "a",      "about", "all",    "also",  "am",     "an",     "and",    "any",   "are",    "as",
      "at",     "be",    "been",   "but",   "by",     "can",    "could",  "do",    "does",   "for",
      "from",   "get",   "give",   "go",    "had",    "has",    "have",   "he",    "her",    "his",
      "how",    "i",     "id",     "if",    "ill",    "im",     "in",     "into",  "is",     "it",
      "its",    "ive",   "just",   "let",   "lets",   "like",   "me",     "my",    "need",   "of",
      "on",     "or",    "our",    "please", "she",   "show",   "so",     "some",  "that",   "the",
      "their",  "them",  "then",   "there", "these",  "they",   "this",   "to",    "up",     "us",
      "was",    "we",    "were",   "what",  "whats",  "when",   "where",  "which", "who",    "why",
      "will",   "with",  "would",  "you",   "your",   "want",   "wanna",  "make",  "making", "cook",
      "cooking", "do",   "doing",  "help",  "find",   "try",    "something", "anything", "recipe",
      "recipes", "task", "tasks",  "idea",  "ideas",  "today",  "tonight", "now",  "maybe",  "good",
      "nice",   "great", "know",   "learn", "teach",  "should", "okay",   "ok",    "alexa",  "hey",
      "hi",     "hello", "thing",  "things", "out",    "fun",    "hungry", "bored", "feel",
      "feeling", "surprise", "suggest", "suggestion", "recommend", "else"};
  return kStop;
}

inline bool is_stopword(std::string_view w) { return stopwords().count(std::string(w)) > 0; }

}  // namespace oat::text
