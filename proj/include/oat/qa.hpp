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

// Question answering grounded in the current step. Answers quote node text
// verbatim or use a fixed deferral; nothing is invented.

#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "oat/engine.hpp"
#include "oat/error.hpp"
#include "oat/taskgraph.hpp"
#include "oat/text.hpp"

namespace oat::qa {

enum class Category { Requirements, Substitution, StepDetail, ExtraFact, GeneralFallback };

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::Requirements: return "requirements";
    case Category::Substitution: return "substitution";
    case Category::StepDetail: return "step_detail";
    case Category::ExtraFact: return "extra_fact";
    case Category::GeneralFallback: return "general_fallback";
  }
  return "?";
}

inline constexpr std::string_view kDeferral = "I don't have that information for this task.";
inline constexpr std::string_view kNoExtras = "I don't have any extra tips for this step.";
inline constexpr std::string_view kNoRequirements = "Nothing needs to be gathered for this step.";

namespace detail {

inline bool has_any(const std::vector<std::string>& words, std::initializer_list<std::string_view> keys) {
  for (const auto& w : words) {
    for (auto k : keys) {
      if (w == k) return true;
    }
  }
  return false;
}

inline std::set<std::string> content_words(std::string_view s) {
  std::set<std::string> out;
  for (const auto& w : text::words(s)) {
    if (!text::is_stopword(w)) out.insert(text::fold_plural(w));
  }
  return out;
}

}  // namespace detail

/// Keyword routing. Throws InputError for an empty question.
inline Category route(std::string_view question, const engine::StepContext& ctx) {
  auto words = text::words(question);
  if (words.empty()) throw InputError("question is empty");
  if (detail::has_any(words, {"need", "needs", "ingredient", "ingredients", "tool", "tools", "equipment",
                              "require", "requires", "required", "supplies"}))
    return Category::Requirements;
  if (detail::has_any(words, {"instead", "substitute", "substitution", "replace", "swap", "alternative"}))
    return Category::Substitution;
  if (detail::has_any(words, {"tip", "tips", "fact", "facts", "trick", "tricks", "advice"}))
    return Category::ExtraFact;
  if (detail::has_any(words, {"how", "why", "hows"}) && ctx.step) {
    auto step_words = detail::content_words(ctx.summary + " " + ctx.details.value_or(""));
    for (const auto& w : detail::content_words(question)) {
      if (step_words.count(w)) return Category::StepDetail;
    }
  }
  return Category::GeneralFallback;
}

struct Answer {
  Category category = Category::GeneralFallback;
  std::string text;
  bool grounded = false;  // text quotes graph content
};

inline std::string requirement_phrase(const RequirementPayload& r) {
  return r.quantity && !r.quantity->empty() ? *r.quantity + " " + r.name : r.name;
}

inline std::string requirements_text(const engine::StepContext& ctx) {
  std::vector<std::string> items;
  for (const auto& n : ctx.requirements) items.push_back(requirement_phrase(n.as<RequirementPayload>()));
  if (items.empty()) return std::string(kNoRequirements);
  std::string list;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) list += i + 1 == items.size() ? " and " : ", ";
    list += items[i];
  }
  return (ctx.step ? "For this step you need " : "For this task you need ") + list + ".";
}

/// Extra-info text for the given rotation index, cycling through the
/// step's extras (or the task's when there is no step).
inline Answer extra_fact(const engine::StepContext& ctx, std::size_t rotation) {
  if (ctx.extras.empty()) return {Category::ExtraFact, std::string(kNoExtras), false};
  const auto& x = ctx.extras[rotation % ctx.extras.size()].as<ExtraInfoPayload>();
  return {Category::ExtraFact, x.text, true};
}

inline Answer answer(Category category, std::string_view question, const engine::StepContext& ctx,
                     std::size_t rotation = 0) {
  (void)question;
  switch (category) {
    case Category::Requirements:
      return {category, requirements_text(ctx), !ctx.requirements.empty()};
    case Category::StepDetail:
      if (ctx.details) return {category, *ctx.details, true};
      if (ctx.step) return {category, ctx.summary, true};
      return {category, std::string(kDeferral), false};
    case Category::ExtraFact:
      return extra_fact(ctx, rotation);
    case Category::Substitution:
    case Category::GeneralFallback:
      break;
  }
  return {category, std::string(kDeferral), false};
}

inline Answer ask(std::string_view question, const engine::StepContext& ctx, std::size_t rotation = 0) {
  return answer(route(question, ctx), question, ctx, rotation);
}

}  // namespace oat::qa
