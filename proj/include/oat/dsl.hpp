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

// The decision DSL: one function call per line, e.g.
//
//   step_select(step=1)
//   search(vague=true, theme="thanksgiving")
//
// Grammar:
//   call  := IDENT "(" [arg ("," arg)*] ")"
//   arg   := [IDENT "="] value
//   value := INT | "true" | "false" | STRING
//
// Positional arguments are mapped onto the registry signature in order and
// must precede named ones.

#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "oat/error.hpp"

namespace oat::dsl {

enum class Type { Int, Bool, Str };

inline std::string_view to_string(Type t) {
  switch (t) {
    case Type::Int: return "Int";
    case Type::Bool: return "Bool";
    case Type::Str: return "Str";
  }
  return "?";
}

/// A literal. Int holds a signed value so that a negative literal can reach
/// the checker and be reported there.
class Value {
 public:
  Value() = default;
  static Value integer(std::int64_t v) { return Value(v); }
  static Value boolean(bool v) { return Value(v); }
  static Value string(std::string v) { return Value(std::move(v)); }

  Type type() const { return static_cast<Type>(v_.index()); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }
  const std::string& as_str() const { return std::get<std::string>(v_); }

  bool operator==(const Value&) const = default;

 private:
  explicit Value(std::int64_t v) : v_(v) {}
  explicit Value(bool v) : v_(v) {}
  explicit Value(std::string v) : v_(std::move(v)) {}

  std::variant<std::int64_t, bool, std::string> v_{std::int64_t{0}};
};

struct Arg {
  std::string name;
  Value value;

  bool operator==(const Arg&) const = default;
};

/// A decision. After checking, args are in registry order.
struct Call {
  std::string function;
  std::vector<Arg> args;

  const Value* arg(std::string_view name) const {
    for (const auto& a : args) {
      if (a.name == name) return &a.value;
    }
    return nullptr;
  }

  bool operator==(const Call&) const = default;
};

/// Base for all DSL failures; carries the byte offset into the input.
class DslError : public Error {
 public:
  DslError(std::string code, const std::string& message, std::size_t offset)
      : Error(std::move(code), message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class LexError : public DslError {
 public:
  LexError(const std::string& m, std::size_t off) : DslError("lex_error", m, off) {}
};

class SyntaxError : public DslError {
 public:
  SyntaxError(const std::string& m, std::size_t off) : DslError("syntax_error", m, off) {}
};

class CheckError : public DslError {
 public:
  CheckError(const std::string& m, std::size_t off) : DslError("check_error", m, off) {}
};

struct Param {
  std::string name;
  Type type;
};

using Signature = std::vector<Param>;

class Registry {
 public:
  void add(std::string name, Signature sig) {
    if (table_.count(name)) throw Error("registry_error", "function '" + name + "' is already registered");
    order_.push_back(name);
    table_.emplace(std::move(name), std::move(sig));
  }

  const Signature* find(std::string_view name) const {
    auto it = table_.find(std::string(name));
    return it == table_.end() ? nullptr : &it->second;
  }

  /// Registration order.
  const std::vector<std::string>& functions() const { return order_; }

  /// The closed set used throughout the system.
  static const Registry& standard() {
    static const Registry r = [] {
      Registry reg;
      reg.add("select", {{"option", Type::Int}});
      reg.add("answer_question", {});
      reg.add("search", {{"vague", Type::Bool}, {"theme", Type::Str}});
      reg.add("previous", {});
      reg.add("next", {});
      reg.add("step_select", {{"step", Type::Int}});
      reg.add("timer", {{"span", Type::Str}});
      reg.add("chit_chat", {});
      reg.add("condition", {{"value", Type::Bool}});
      reg.add("stop", {});
      return reg;
    }();
    return r;
  }

 private:
  std::map<std::string, Signature, std::less<>> table_;
  std::vector<std::string> order_;
};

namespace detail {

enum class Tok { Ident, Int, String, LParen, RParen, Comma, Equals, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string text;        // identifier or decoded string
  std::int64_t number = 0;
};

inline bool ident_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
inline bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
inline bool digit(char c) { return c >= '0' && c <= '9'; }
inline bool blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && blank(src_[pos_])) ++pos_;
    if (pos_ >= src_.size()) return {Tok::End, pos_, {}};
    const std::size_t start = pos_;
    const char c = src_[pos_];
    switch (c) {
      case '(': ++pos_; return {Tok::LParen, start, "("};
      case ')': ++pos_; return {Tok::RParen, start, ")"};
      case ',': ++pos_; return {Tok::Comma, start, ","};
      case '=': ++pos_; return {Tok::Equals, start, "="};
      case '"': return string_literal();
      default: break;
    }
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
      return {Tok::Ident, start, std::string(src_.substr(start, pos_ - start))};
    }
    if (digit(c) || (c == '-' && pos_ + 1 < src_.size() && digit(src_[pos_ + 1]))) return integer();
    throw LexError("unexpected character '" + std::string(1, c) + "'", start);
  }

 private:
  Token integer() {
    const std::size_t start = pos_;
    if (src_[pos_] == '-') ++pos_;
    while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && ident_char(src_[pos_]))
      throw LexError("malformed integer literal", start);
    std::int64_t v = 0;
    auto text = src_.substr(start, pos_ - start);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw LexError("integer literal out of range", start);
    return {Tok::Int, start, std::string(text), v};
  }

  Token string_literal() {
    const std::size_t start = pos_++;
    std::string out;
    while (pos_ < src_.size()) {
      char c = src_[pos_++];
      if (c == '"') return {Tok::String, start, std::move(out)};
      if (c == '\\') {
        if (pos_ >= src_.size()) break;
        char e = src_[pos_++];
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: throw LexError("unknown escape '\\" + std::string(1, e) + "'", pos_ - 2);
        }
        continue;
      }
      out.push_back(c);
    }
    throw LexError("unterminated string", start);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

struct RawArg {
  std::optional<std::string> name;
  std::size_t name_offset;
  Value value;
  std::size_t value_offset;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { advance(); }

  std::pair<Token, std::vector<RawArg>> call() {
    if (tok_.kind != Tok::Ident) throw SyntaxError("expected function name", tok_.offset);
    Token name = tok_;
    advance();
    expect(Tok::LParen, "'('");
    std::vector<RawArg> args;
    if (tok_.kind != Tok::RParen) {
      args.push_back(arg());
      while (tok_.kind == Tok::Comma) {
        advance();
        args.push_back(arg());
      }
    }
    expect(Tok::RParen, "')' or ','");
    if (tok_.kind != Tok::End) throw SyntaxError("unexpected input after call", tok_.offset);
    return {std::move(name), std::move(args)};
  }

 private:
  void advance() { tok_ = lex_.next(); }

  void expect(Tok kind, const char* what) {
    if (tok_.kind != kind) throw SyntaxError(std::string("expected ") + what, tok_.offset);
    advance();
  }

  RawArg arg() {
    RawArg a;
    if (tok_.kind == Tok::Ident && tok_.text != "true" && tok_.text != "false") {
      a.name = tok_.text;
      a.name_offset = tok_.offset;
      advance();
      expect(Tok::Equals, "'='");
    } else {
      a.name_offset = tok_.offset;
    }
    a.value_offset = tok_.offset;
    switch (tok_.kind) {
      case Tok::Int: a.value = Value::integer(tok_.number); break;
      case Tok::String: a.value = Value::string(tok_.text); break;
      case Tok::Ident:
        if (tok_.text == "true") a.value = Value::boolean(true);
        else if (tok_.text == "false") a.value = Value::boolean(false);
        else throw SyntaxError("expected a value", tok_.offset);
        break;
      default: throw SyntaxError("expected a value", tok_.offset);
    }
    advance();
    return a;
  }

  Lexer lex_;
  Token tok_{};
};

}  // namespace detail

/// Parses and registry-checks one call. Throws LexError, SyntaxError or
/// CheckError, each located by byte offset.
inline Call parse(std::string_view text, const Registry& registry = Registry::standard()) {
  detail::Parser p(text);
  auto [name, raw] = p.call();
  const Signature* sig = registry.find(name.text);
  if (!sig) throw CheckError("unknown function '" + name.text + "'", name.offset);

  std::vector<std::optional<Value>> slots(sig->size());
  bool seen_named = false;
  std::size_t positional = 0;
  for (auto& a : raw) {
    std::size_t slot;
    if (a.name) {
      seen_named = true;
      slot = sig->size();
      for (std::size_t i = 0; i < sig->size(); ++i) {
        if ((*sig)[i].name == *a.name) slot = i;
      }
      if (slot == sig->size())
        throw CheckError("'" + name.text + "' has no parameter '" + *a.name + "'", a.name_offset);
    } else {
      if (seen_named) throw SyntaxError("positional argument after named argument", a.value_offset);
      slot = positional++;
      if (slot >= sig->size())
        throw CheckError("too many arguments to '" + name.text + "'", a.value_offset);
    }
    if (slots[slot]) throw CheckError("duplicate argument '" + (*sig)[slot].name + "'", a.name_offset);
    const Param& param = (*sig)[slot];
    if (a.value.type() != param.type)
      throw CheckError("argument '" + param.name + "' must be " + std::string(to_string(param.type)) + ", got " +
                           std::string(to_string(a.value.type())),
                       a.value_offset);
    if (param.type == Type::Int && a.value.as_int() < 0)
      throw CheckError("argument '" + param.name + "' must be non-negative", a.value_offset);
    slots[slot] = std::move(a.value);
  }

  Call call{name.text, {}};
  for (std::size_t i = 0; i < sig->size(); ++i) {
    if (!slots[i]) throw CheckError("missing argument '" + (*sig)[i].name + "' for '" + name.text + "'", text.size());
    call.args.push_back({(*sig)[i].name, std::move(*slots[i])});
  }
  return call;
}

/// Checks a programmatically built call, returning it with args in
/// registry order. Offsets in errors are 0.
inline Call check(const Call& c, const Registry& registry = Registry::standard()) {
  const Signature* sig = registry.find(c.function);
  if (!sig) throw CheckError("unknown function '" + c.function + "'", 0);
  Call out{c.function, {}};
  for (const auto& p : *sig) {
    const Value* v = nullptr;
    std::size_t hits = 0;
    for (const auto& a : c.args) {
      if (a.name == p.name) {
        v = &a.value;
        ++hits;
      }
    }
    if (hits == 0) throw CheckError("missing argument '" + p.name + "'", 0);
    if (hits > 1) throw CheckError("duplicate argument '" + p.name + "'", 0);
    if (v->type() != p.type) throw CheckError("argument '" + p.name + "' has the wrong type", 0);
    if (p.type == Type::Int && v->as_int() < 0) throw CheckError("argument '" + p.name + "' must be non-negative", 0);
    out.args.push_back({p.name, *v});
  }
  if (c.args.size() != sig->size()) throw CheckError("unexpected argument for '" + c.function + "'", 0);
  return out;
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

inline std::string render(const Value& v) {
  switch (v.type()) {
    case Type::Int: return std::to_string(v.as_int());
    case Type::Bool: return v.as_bool() ? "true" : "false";
    case Type::Str: return quote(v.as_str());
  }
  return {};
}

/// Canonical surface form: `name(a=v, b=v)` with args in registry order.
inline std::string render(const Call& c) {
  std::string out = c.function + "(";
  for (std::size_t i = 0; i < c.args.size(); ++i) {
    if (i) out += ", ";
    out += c.args[i].name + "=" + render(c.args[i].value);
  }
  out += ")";
  return out;
}

// Convenience constructors for the standard registry.
inline Call make_select(std::int64_t option) { return {"select", {{"option", Value::integer(option)}}}; }
inline Call make_answer_question() { return {"answer_question", {}}; }
inline Call make_search(bool vague, std::string theme) {
  return {"search", {{"vague", Value::boolean(vague)}, {"theme", Value::string(std::move(theme))}}};
}
inline Call make_previous() { return {"previous", {}}; }
inline Call make_next() { return {"next", {}}; }
inline Call make_step_select(std::int64_t step) { return {"step_select", {{"step", Value::integer(step)}}}; }
inline Call make_timer(std::string span) { return {"timer", {{"span", Value::string(std::move(span))}}}; }
inline Call make_chit_chat() { return {"chit_chat", {}}; }
inline Call make_condition(bool value) { return {"condition", {{"value", Value::boolean(value)}}}; }
inline Call make_stop() { return {"stop", {}}; }

}  // namespace oat::dsl
