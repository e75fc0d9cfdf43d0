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

// Sparse task retrieval: BM25 over title, description, requirement names and
// tags, an optional theme boost and a re-ranking hook.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "oat/corpus.hpp"
#include "oat/error.hpp"
#include "oat/taskgraph.hpp"
#include "oat/text.hpp"

namespace oat::search {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
  double theme_boost = 1.5;
};

inline constexpr int kTitleWeight = 3;
inline constexpr int kDescriptionWeight = 1;
inline constexpr int kRequirementWeight = 2;
inline constexpr int kTagWeight = 2;

/// Lowercase, split on non-alphanumerics, drop stopwords.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (auto& w : text::words(s)) {
    if (!text::is_stopword(w)) out.push_back(std::move(w));
  }
  return out;
}

/// Value part of a tag: "theme:pasta" -> "pasta".
inline std::string tag_value(std::string_view tag) {
  auto colon = tag.find(':');
  return std::string(colon == std::string_view::npos ? tag : tag.substr(colon + 1));
}

/// The weighted term stream for one graph; its size is the doc length.
inline std::vector<std::string> document_terms(const TaskGraph& g) {
  std::vector<std::string> out;
  auto add = [&](std::string_view s, int weight) {
    auto toks = tokenize(s);
    for (int i = 0; i < weight; ++i) out.insert(out.end(), toks.begin(), toks.end());
  };
  add(g.title, kTitleWeight);
  add(g.description, kDescriptionWeight);
  for (const auto& n : g.nodes) {
    if (const auto* r = n.try_as<RequirementPayload>()) add(r->name, kRequirementWeight);
  }
  for (const auto& t : g.tags) add(tag_value(t), kTagWeight);
  return out;
}

inline std::string make_snippet(std::string_view description, std::size_t max_len = 160) {
  auto s = text::trim(description);
  if (s.size() <= max_len) return s;
  auto cut = s.rfind(' ', max_len);
  if (cut == std::string::npos || cut == 0) cut = max_len;
  return s.substr(0, cut) + "...";
}

struct Posting {
  std::size_t doc;
  std::size_t tf;
};

struct DocEntry {
  std::string task_id;
  std::string title;
  std::string description;
  std::vector<std::string> requirements;
  std::vector<std::string> tags;
  std::size_t length = 0;
};

struct RankedResult {
  std::string task_id;
  double score = 0.0;
  std::string title;
  std::string snippet;
};

inline Json to_json(const RankedResult& r) {
  return Json{{"task_id", r.task_id}, {"score", r.score}, {"title", r.title}, {"snippet", r.snippet}};
}

class Reranker {
 public:
  virtual ~Reranker() = default;
  virtual std::vector<RankedResult> rerank(std::string_view query, std::vector<RankedResult> results) const = 0;
};

class IdentityReranker final : public Reranker {
 public:
  std::vector<RankedResult> rerank(std::string_view, std::vector<RankedResult> results) const override {
    return results;
  }
};

class SearchIndex {
 public:
  SearchIndex() = default;

  /// Graphs must have unique ids (see make_corpus).
  static SearchIndex build(const std::vector<TaskGraph>& graphs, Bm25Params params = {}) {
    SearchIndex idx;
    idx.params_ = params;
    std::vector<const TaskGraph*> sorted;
    for (const auto& g : graphs) sorted.push_back(&g);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i]->id == sorted[i - 1]->id) throw InputError("duplicate task id '" + sorted[i]->id + "'");
    }
    double total = 0;
    for (std::size_t d = 0; d < sorted.size(); ++d) {
      const auto& g = *sorted[d];
      DocEntry e{g.id, g.title, g.description, {}, g.tags, 0};
      for (const auto& n : g.nodes) {
        if (const auto* r = n.try_as<RequirementPayload>()) e.requirements.push_back(r->name);
      }
      auto terms = document_terms(g);
      e.length = terms.size();
      total += static_cast<double>(e.length);
      std::map<std::string, std::size_t> tf;
      for (const auto& t : terms) ++tf[t];
      for (const auto& [term, count] : tf) idx.postings_[term].push_back({d, count});
      idx.docs_.push_back(std::move(e));
    }
    idx.avgdl_ = idx.docs_.empty() ? 0.0 : total / static_cast<double>(idx.docs_.size());
    return idx;
  }

  static SearchIndex build(const Corpus& corpus, Bm25Params params = {}) { return build(corpus.graphs, params); }

  std::size_t size() const { return docs_.size(); }
  double avgdl() const { return avgdl_; }
  const std::vector<DocEntry>& docs() const { return docs_; }
  const Bm25Params& params() const { return params_; }

  const std::vector<Posting>* postings(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
  }

  double idf(const std::string& term) const {
    const auto* p = postings(term);
    if (!p) return 0.0;
    const double n = static_cast<double>(docs_.size());
    const double df = static_cast<double>(p->size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
  }

  /// Unboosted BM25 score of every doc, indexed like docs().
  std::vector<double> scores(const std::vector<std::string>& query_terms) const {
    std::vector<double> out(docs_.size(), 0.0);
    std::set<std::string> unique(query_terms.begin(), query_terms.end());
    for (const auto& t : unique) {
      const auto* p = postings(t);
      if (!p) continue;
      const double w = idf(t);
      for (const auto& post : *p) {
        const double tf = static_cast<double>(post.tf);
        const double len = static_cast<double>(docs_[post.doc].length);
        out[post.doc] += w * tf * (params_.k1 + 1) / (tf + params_.k1 * (1 - params_.b + params_.b * len / avgdl_));
      }
    }
    return out;
  }

  /// Top-k tasks with a positive score. Throws InputError when the query has
  /// no indexable terms or k < 1.
  std::vector<RankedResult> query(std::string_view text, std::string_view theme = "", int k = 10,
                                  const Reranker* reranker = nullptr) const {
    if (k < 1) throw InputError("k must be at least 1");
    auto terms = tokenize(text);
    if (terms.empty()) throw InputError("query has no searchable terms");
    auto base = scores(terms);
    const std::string theme_tag = theme.empty() ? "" : "theme:" + text::normalize(theme);
    std::vector<RankedResult> results;
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      double s = base[d];
      if (s <= 0.0) continue;
      if (!theme_tag.empty() && has_tag(docs_[d], theme_tag)) s *= params_.theme_boost;
      results.push_back({docs_[d].task_id, s, docs_[d].title, make_snippet(docs_[d].description)});
    }
    std::sort(results.begin(), results.end(), [](const RankedResult& a, const RankedResult& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.task_id < b.task_id;
    });
    if (results.size() > static_cast<std::size_t>(k)) results.resize(static_cast<std::size_t>(k));
    if (reranker) results = reranker->rerank(text, std::move(results));
    return results;
  }

  /// Distinct theme values over all docs, sorted.
  std::vector<std::string> themes() const {
    std::set<std::string> out;
    for (const auto& d : docs_) {
      for (const auto& t : d.tags) {
        if (t.starts_with("theme:")) out.insert(t.substr(6));
      }
    }
    return {out.begin(), out.end()};
  }

  Json stats() const {
    Json j{{"documents", docs_.size()}, {"terms", postings_.size()}, {"avgdl", avgdl_}};
    return j;
  }

 private:
  static bool has_tag(const DocEntry& d, const std::string& tag) {
    return std::any_of(d.tags.begin(), d.tags.end(), [&](const std::string& t) { return text::to_lower(t) == tag; });
  }

  Bm25Params params_;
  std::vector<DocEntry> docs_;
  std::map<std::string, std::vector<Posting>> postings_;
  double avgdl_ = 0.0;
};

/// Loads and indexes a corpus directory.
struct IndexBuild {
  Corpus corpus;
  SearchIndex index;
};

inline IndexBuild build_index(const std::filesystem::path& dir, Bm25Params params = {}) {
  auto corpus = load_corpus(dir);
  auto index = SearchIndex::build(corpus, params);
  return {std::move(corpus), std::move(index)};
}

/// Mean reciprocal rank and hit@1 over (query, relevant id) pairs.
struct RetrievalEval {
  std::size_t queries = 0;
  double mrr = 0.0;
  double hit_at_1 = 0.0;
};

struct QueryJudgement {
  std::string query;
  std::string theme;
  std::string relevant;
};

inline RetrievalEval evaluate_retrieval(const SearchIndex& index, const std::vector<QueryJudgement>& pairs,
                                        int k = 10) {
  RetrievalEval r;
  for (const auto& p : pairs) {
    ++r.queries;
    auto results = index.query(p.query, p.theme, k);
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results[i].task_id == p.relevant) {
        r.mrr += 1.0 / static_cast<double>(i + 1);
        if (i == 0) r.hit_at_1 += 1.0;
        break;
      }
    }
  }
  if (r.queries) {
    r.mrr /= static_cast<double>(r.queries);
    r.hit_at_1 /= static_cast<double>(r.queries);
  }
  return r;
}

inline std::vector<QueryJudgement> load_judgements(std::string_view bytes) {
  std::vector<QueryJudgement> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    auto line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto j = Json::parse(line);
      out.push_back({j.at("query").get<std::string>(), j.value("theme", std::string()),
                     j.at("relevant").get<std::string>()});
    } catch (const Json::exception& e) {
      throw ParseError("judgement line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace oat::search
