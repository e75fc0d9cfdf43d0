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

// Step media augmentation: action phrase extraction, text embeddings and
// nearest-caption matching against image and video catalogs.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "oat/error.hpp"
#include "oat/taskgraph.hpp"
#include "oat/text.hpp"

namespace oat::media {

inline constexpr double kDefaultMinSim = 0.30;
inline constexpr std::size_t kMaxActionTokens = 6;

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw InputError("embedding dimensions differ");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vector& v) { return std::sqrt(dot(v, v)); }

inline Vector normalized(Vector v) {
  double n = norm(v);
  if (n == 0.0) throw InputError("cannot normalize a zero vector");
  for (auto& x : v) x /= n;
  return v;
}

// ---------------------------------------------------------------------------
// Action extraction

inline const std::vector<std::string>& default_verbs() {
  static const std::vector<std::string> kVerbs = {
      "add",    "arrange", "bake",   "beat",    "blend",  "boil",    "braise",  "bring",   "broil",  "brush",
      "chop",   "clean",   "coat",   "combine", "cook",   "cool",    "cover",   "crack",   "cream",  "cut",
      "dice",   "drain",   "drill",  "drizzle", "dry",    "dust",    "fill",    "fold",    "fry",    "garnish",
      "glue",   "grate",   "grease", "grill",   "hammer", "hang",    "heat",    "insert",  "knead",  "layer",
      "level",  "marinate", "mark",  "mash",    "measure", "melt",   "mince",   "mix",     "mount",  "nail",
      "paint",  "peel",    "pour",   "preheat", "press",  "prime",   "proof",   "remove",  "rinse",  "roast",
      "roll",   "rub",     "sand",   "saute",   "screw",  "season",  "sear",    "serve",   "sew",    "shape",
      "simmer", "slice",   "soak",   "spread",  "sprinkle", "stain", "steam",   "stir",    "strain", "stuff",
      "tape",   "tighten", "toast",  "toss",    "trim",   "wash",    "water",   "whip",    "whisk",  "wipe"};
  return kVerbs;
}

class ActionExtractor {
 public:
  explicit ActionExtractor(std::vector<std::string> verbs = default_verbs()) {
    for (auto& v : verbs) verbs_.insert(text::normalize(v));
  }

  static ActionExtractor from_json(const Json& j) {
    if (!j.is_object() || !j.contains("verbs") || !j["verbs"].is_array())
      throw SchemaError("verb lexicon: expected {\"verbs\": [...]}");
    std::vector<std::string> verbs;
    for (const auto& v : j["verbs"]) {
      if (!v.is_string()) throw SchemaError("verb lexicon: verbs must be strings");
      verbs.push_back(v.get<std::string>());
    }
    return ActionExtractor(std::move(verbs));
  }

  const std::set<std::string>& verbs() const { return verbs_; }

  /// Lexicon verb plus following words up to the first clause boundary,
  /// at most six words; otherwise the first six words of the first sentence.
  std::string extract(std::string_view step_text) const {
    auto sentence = first_sentence(step_text);
    auto clause_tokens = tokens_with_breaks(sentence);
    std::vector<std::string> words;
    for (const auto& t : clause_tokens)
      if (t != ",") words.push_back(t);
    for (std::size_t i = 0; i < clause_tokens.size(); ++i) {
      if (!verbs_.count(clause_tokens[i])) continue;
      std::vector<std::string> out;
      for (std::size_t j = i; j < clause_tokens.size() && out.size() < kMaxActionTokens; ++j) {
        const auto& t = clause_tokens[j];
        if (t == "," || (j > i && is_conjunction(t))) break;
        out.push_back(t);
      }
      return text::join(out, " ");
    }
    if (words.size() > kMaxActionTokens) words.resize(kMaxActionTokens);
    return text::join(words, " ");
  }

 private:
  static bool is_conjunction(const std::string& w) {
    return w == "and" || w == "or" || w == "but" || w == "then" || w == "until" || w == "while";
  }

  static std::string first_sentence(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      char c = s[i];
      if ((c == '.' || c == '!' || c == '?') && (i + 1 == s.size() || text::is_space(s[i + 1])))
        return std::string(s.substr(0, i));
    }
    return std::string(s);
  }

  // Lowercased words with "," kept as a boundary token.
  static std::vector<std::string> tokens_with_breaks(std::string_view s) {
    std::vector<std::string> out;
    std::string piece;
    auto flush = [&] {
      for (auto& w : text::words(piece)) out.push_back(std::move(w));
      piece.clear();
    };
    for (char c : s) {
      if (c == ',' || c == ';' || c == ':') {
        flush();
        out.emplace_back(",");
      } else {
        piece.push_back(c);
      }
    }
    flush();
    return out;
  }

  std::set<std::string> verbs_;
};

inline std::string extract_action(std::string_view step_text) {
  static const ActionExtractor kDefault;
  return kDefault.extract(step_text);
}

// ---------------------------------------------------------------------------
// Embedding providers

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  /// Unit-length embeddings, one per input text.
  virtual std::vector<Vector> embed_batch(const std::vector<std::string>& texts) const = 0;
  virtual std::string name() const = 0;

  Vector embed(std::string_view text) const { return embed_batch({std::string(text)}).front(); }
};

/// Hashed character-trigram counts: lowercase, non-alphanumeric runs become
/// one space, pad with a space on each side, FNV-1a 64 per trigram, bucket
/// = hash mod D, then L2-normalize.
class LexicalProvider final : public EmbeddingProvider {
 public:
  static constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
  static constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

  explicit LexicalProvider(std::size_t dimension = 256) : dim_(dimension) {
    if (dim_ == 0) throw InputError("embedding dimension must be positive");
  }

  std::size_t dimension() const override { return dim_; }
  std::string name() const override { return "lexical"; }

  static std::string prepare(std::string_view s) {
    std::string out = " ";
    bool gap = false;
    for (char raw : s) {
      char c = raw >= 'A' && raw <= 'Z' ? static_cast<char>(raw - 'A' + 'a') : raw;
      bool alnum = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
      if (!alnum) {
        gap = true;
        continue;
      }
      if (gap && out.size() > 1) out.push_back(' ');
      gap = false;
      out.push_back(c);
    }
    out.push_back(' ');
    return out;
  }

  static std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : bytes) {
      h ^= c;
      h *= kFnvPrime;
    }
    return h;
  }

  std::vector<Vector> embed_batch(const std::vector<std::string>& texts) const override {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      auto s = prepare(t);
      if (s.size() < 3 || s == "  ") throw InputError("cannot embed text without letters or digits");
      Vector v(dim_, 0.0);
      for (std::size_t i = 0; i + 3 <= s.size(); ++i) v[fnv1a(std::string_view(s).substr(i, 3)) % dim_] += 1.0;
      out.push_back(normalized(std::move(v)));
    }
    return out;
  }

 private:
  std::size_t dim_;
};

/// POST {"texts": [...]} -> {"vectors": [[...], ...]}. Replies are checked
/// for count and dimension and re-normalized.
class RemoteProvider final : public EmbeddingProvider {
 public:
  RemoteProvider(std::string url, std::size_t dimension,
                 std::chrono::milliseconds timeout = std::chrono::milliseconds(5000))
      : url_(std::move(url)), dim_(dimension), timeout_(timeout) {
    auto scheme_end = url_.find("://");
    if (scheme_end == std::string::npos) throw InputError("embedding provider url needs a scheme: " + url_);
    auto path_start = url_.find('/', scheme_end + 3);
    base_ = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url_.substr(path_start);
  }

  std::size_t dimension() const override { return dim_; }
  std::string name() const override { return "remote:" + url_; }

  std::vector<Vector> embed_batch(const std::vector<std::string>& texts) const override {
    httplib::Client client(base_);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    auto res = client.Post(path_, Json{{"texts", texts}}.dump(), "application/json");
    if (!res) throw ProtocolError("embedding provider unreachable: " + url_);
    if (res->status != 200) throw ProtocolError("embedding provider returned HTTP " + std::to_string(res->status));
    auto reply = Json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("vectors") || !reply["vectors"].is_array())
      throw ProtocolError("embedding provider reply lacks a vectors array");
    if (reply["vectors"].size() != texts.size()) throw ProtocolError("embedding provider returned wrong vector count");
    std::vector<Vector> out;
    for (const auto& v : reply["vectors"]) {
      if (!v.is_array() || v.size() != dim_) throw ProtocolError("embedding provider returned wrong dimension");
      Vector vec;
      for (const auto& x : v) {
        if (!x.is_number()) throw ProtocolError("embedding provider returned a non-number");
        vec.push_back(x.get<double>());
      }
      out.push_back(normalized(std::move(vec)));
    }
    return out;
  }

 private:
  std::string url_;
  std::string base_;
  std::string path_;
  std::size_t dim_;
  std::chrono::milliseconds timeout_;
};

inline double cosine(const EmbeddingProvider& p, std::string_view a, std::string_view b) {
  return dot(p.embed(a), p.embed(b));
}

// ---------------------------------------------------------------------------
// Catalogs

enum class MediaKind { Image, Video };

struct MediaEntry {
  MediaRef ref;
  std::string text;
  Vector embedding;
};

struct CatalogReport {
  std::size_t entries = 0;
  struct Skip {
    std::size_t line;
    std::string reason;
  };
  std::vector<Skip> skipped;

  Json to_json() const {
    Json s = Json::array();
    for (const auto& k : skipped) s.push_back({{"line", k.line}, {"reason", k.reason}});
    return Json{{"entries", entries}, {"skipped", s}};
  }
};

struct MediaIndex {
  MediaKind kind = MediaKind::Image;
  std::size_t dimension = 0;
  std::vector<MediaEntry> entries;
  CatalogReport report;

  bool empty() const { return entries.empty(); }
};

/// Builds an index from catalog lines: {"url","caption"} for images,
/// {"url","title"} for videos. Bad lines are skipped and reported.
inline MediaIndex build_media_index(std::string_view catalog, MediaKind kind, const EmbeddingProvider& provider) {
  MediaIndex idx;
  idx.kind = kind;
  idx.dimension = provider.dimension();
  const char* text_key = kind == MediaKind::Image ? "caption" : "title";
  std::vector<MediaRef> refs;
  std::vector<std::string> texts;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < catalog.size()) {
    auto end = catalog.find('\n', pos);
    if (end == std::string_view::npos) end = catalog.size();
    auto line = catalog.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      idx.report.skipped.push_back({line_no, "not a JSON object"});
      continue;
    }
    if (!j.contains("url") || !j["url"].is_string() || j["url"].get<std::string>().empty()) {
      idx.report.skipped.push_back({line_no, "missing url"});
      continue;
    }
    if (!j.contains(text_key) || !j[text_key].is_string() || LexicalProvider::prepare(j[text_key].get<std::string>()) == "  ") {
      idx.report.skipped.push_back({line_no, std::string("missing ") + text_key});
      continue;
    }
    auto t = j[text_key].get<std::string>();
    refs.push_back({j["url"].get<std::string>(), t});
    texts.push_back(std::move(t));
  }
  auto vectors = texts.empty() ? std::vector<Vector>{} : provider.embed_batch(texts);
  for (std::size_t i = 0; i < refs.size(); ++i) idx.entries.push_back({refs[i], texts[i], std::move(vectors[i])});
  idx.report.entries = idx.entries.size();
  return idx;
}

struct Match {
  MediaRef ref;
  double score = 0.0;
  std::size_t position = 0;
};

/// Best catalog entry by cosine similarity, if it reaches min_sim. Ties
/// keep the earliest catalog entry.
inline std::optional<Match> match(const MediaIndex& index, std::string_view action, const EmbeddingProvider& provider,
                                  double min_sim = kDefaultMinSim) {
  if (index.entries.empty()) return std::nullopt;
  if (index.dimension != provider.dimension()) throw InputError("media index built with a different provider");
  Vector q;
  try {
    q = provider.embed(action);
  } catch (const InputError&) {
    return std::nullopt;
  }
  std::optional<Match> best;
  for (std::size_t i = 0; i < index.entries.size(); ++i) {
    double s = dot(q, index.entries[i].embedding);
    if (!best || s > best->score) best = Match{index.entries[i].ref, s, i};
  }
  if (best && best->score >= min_sim) return best;
  return std::nullopt;
}

struct AugmentOptions {
  double min_sim = kDefaultMinSim;
  const ActionExtractor* extractor = nullptr;
};

/// Fills missing step images and videos from the best catalog matches.
/// Steps that already carry media keep it.
inline TaskGraph augment(TaskGraph g, const MediaIndex& images, const MediaIndex& videos,
                         const EmbeddingProvider& provider, AugmentOptions opts = {}) {
  static const ActionExtractor kDefault;
  const ActionExtractor& extractor = opts.extractor ? *opts.extractor : kDefault;
  for (auto& n : g.nodes) {
    auto* s = std::get_if<StepPayload>(&n.payload);
    if (!s || (s->image && s->video)) continue;
    auto action = extractor.extract(s->summary);
    if (!s->image) {
      if (auto m = match(images, action, provider, opts.min_sim)) s->image = m->ref;
    }
    if (!s->video) {
      if (auto m = match(videos, action, provider, opts.min_sim)) s->video = m->ref;
    }
  }
  return g;
}

}  // namespace oat::media
