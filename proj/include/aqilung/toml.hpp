// Copyright 2026 The aqilung Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aqilung/error.hpp"

namespace aqilung::toml {

/// One parsed value. Tables are flattened into dotted key paths, so there
/// is no table kind here.
struct Value {
  enum class Kind { kString, kInt, kFloat, kBool, kArray };
  Kind kind = Kind::kString;
  std::string str;
  std::int64_t integer = 0;
  double number = 0.0;
  bool boolean = false;
  std::vector<Value> items;
  std::size_t line = 0;

  std::string_view kind_name() const {
    switch (kind) {
      case Kind::kString: return "string";
      case Kind::kInt: return "integer";
      case Kind::kFloat: return "float";
      case Kind::kBool: return "boolean";
      case Kind::kArray: return "array";
    }
    return "?";
  }
};

using Key = std::vector<std::string>;

inline std::string key_str(const Key& k) {
  std::string out;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) out += '.';
    out += k[i];
  }
  return out;
}

/// Key path -> value, in key order.
using Document = std::map<Key, Value>;

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  /// Parses a lone value (used by command-line overrides).
  Value lone_value() {
    skip_ws();
    Value v = value();
    skip_ws();
    if (!eof()) fail("trailing characters after value");
    return v;
  }

  Key lone_key() {
    skip_ws();
    Key k = key();
    skip_ws();
    if (!eof()) fail("trailing characters after key");
    return k;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(line_, msg); }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void newline() {
    if (!eof() && peek() == '\r') ++pos_;
    if (eof() || peek() != '\n') fail("expected end of line");
    ++pos_;
    ++line_;
  }

  void skip_blank_lines() {
    while (true) {
      skip_ws();
      skip_comment();
      if (eof()) return;
      if (peek() == '\n' || peek() == '\r') {
        newline();
      } else {
        return;
      }
    }
  }

  // Whitespace, comments and newlines inside arrays.
  void skip_array_space() {
    while (true) {
      skip_ws();
      skip_comment();
      if (!eof() && (peek() == '\n' || peek() == '\r')) {
        newline();
      } else {
        return;
      }
    }
  }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (!eof()) newline();
  }

  static bool bare_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  }

  Key key() {
    Key k;
    while (true) {
      skip_ws();
      if (eof()) fail("expected a key");
      if (peek() == '"') {
        k.push_back(basic_string());
      } else if (peek() == '\'') {
        k.push_back(literal_string());
      } else {
        const std::size_t start = pos_;
        while (!eof() && bare_char(peek())) ++pos_;
        if (pos_ == start) fail("expected a key");
        k.emplace_back(s_.substr(start, pos_ - start));
      }
      skip_ws();
      if (!eof() && peek() == '.') {
        ++pos_;
        continue;
      }
      return k;
    }
  }

  std::string basic_string() {
    expect('"');
    if (s_.substr(pos_, 2) == "\"\"") fail("multi-line strings are not supported");
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      switch (s_[pos_++]) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        default: fail("unsupported escape sequence");
      }
    }
  }

  std::string literal_string() {
    expect('\'');
    const std::size_t start = pos_;
    while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
    if (eof() || peek() != '\'') fail("unterminated string");
    return std::string(s_.substr(start, pos_++ - start));
  }

  Value value() {
    Value v;
    v.line = line_;
    if (eof()) fail("expected a value");
    const char c = peek();
    if (c == '"') {
      v.str = basic_string();
    } else if (c == '\'') {
      v.str = literal_string();
    } else if (c == '[') {
      ++pos_;
      v.kind = Value::Kind::kArray;
      skip_array_space();
      while (!eof() && peek() != ']') {
        v.items.push_back(value());
        if (v.items.back().kind != v.items.front().kind &&
            !(is_number(v.items.back()) && is_number(v.items.front()))) {
          fail("array mixes " + std::string(v.items.front().kind_name()) + " and " +
               std::string(v.items.back().kind_name()));
        }
        skip_array_space();
        if (!eof() && peek() == ',') {
          ++pos_;
          skip_array_space();
        } else {
          break;
        }
      }
      expect(']');
    } else if (c == '{') {
      fail("inline tables are only allowed as a whole key's value");
    } else {
      const std::size_t start = pos_;
      while (!eof() && peek() != ',' && peek() != ']' && peek() != '}' && peek() != '#' && peek() != '\n' &&
             peek() != '\r' && peek() != ' ' && peek() != '\t') {
        ++pos_;
      }
      scalar(std::string(s_.substr(start, pos_ - start)), v);
    }
    return v;
  }

  static bool is_number(const Value& v) { return v.kind == Value::Kind::kInt || v.kind == Value::Kind::kFloat; }

  void scalar(std::string tok, Value& v) {
    if (tok == "true" || tok == "false") {
      v.kind = Value::Kind::kBool;
      v.boolean = tok == "true";
      return;
    }
    if (tok.empty()) fail("expected a value");
    std::string digits;
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (tok[i] == '_') {
        if (i == 0 || i + 1 == tok.size() || !std::isdigit(static_cast<unsigned char>(tok[i - 1])) ||
            !std::isdigit(static_cast<unsigned char>(tok[i + 1]))) {
          fail("misplaced underscore in '" + tok + "'");
        }
        continue;
      }
      digits += tok[i];
    }
    const char* b = digits.data() + (digits[0] == '+' ? 1 : 0);
    const char* e = digits.data() + digits.size();
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits.find("inf") != std::string::npos ||
                          digits.find("nan") != std::string::npos;
    if (!is_float) {
      std::int64_t i = 0;
      const auto r = std::from_chars(b, e, i);
      if (r.ec != std::errc() || r.ptr != e) fail("invalid value '" + tok + "'");
      v.kind = Value::Kind::kInt;
      v.integer = i;
      return;
    }
    double d = 0.0;
    const auto r = std::from_chars(b, e, d);
    if (r.ec != std::errc() || r.ptr != e || !std::isfinite(d)) fail("invalid value '" + tok + "'");
    v.kind = Value::Kind::kFloat;
    v.number = d;
  }

  void assign(Document& doc, const Key& k, Value v) {
    if (doc.count(k)) fail("key '" + key_str(k) + "' defined twice");
    doc.emplace(k, std::move(v));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::map<Key, std::size_t> defined_tables_;

 public:
  // Inline table support: `key = { a = 1, b = "x" }` flattens into key.a, key.b.
  bool try_inline_table(Document& doc, const Key& prefix) {
    if (eof() || peek() != '{') return false;
    ++pos_;
    skip_ws();
    if (!eof() && peek() == '}') {
      ++pos_;
      return true;
    }
    while (true) {
      Key k = prefix;
      const Key rel = key();
      k.insert(k.end(), rel.begin(), rel.end());
      skip_ws();
      expect('=');
      skip_ws();
      if (!try_inline_table(doc, k)) assign(doc, k, value());
      skip_ws();
      if (!eof() && peek() == ',') {
        ++pos_;
        skip_ws();
        continue;
      }
      expect('}');
      return true;
    }
  }

  Document document() {
    Document doc;
    Key table;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (!eof() && peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        table = key();
        skip_ws();
        expect(']');
        if (defined_tables_.count(table)) fail("table [" + key_str(table) + "] defined twice");
        defined_tables_[table] = line_;
      } else {
        Key k = table;
        const Key rel = key();
        k.insert(k.end(), rel.begin(), rel.end());
        skip_ws();
        expect('=');
        skip_ws();
        if (!try_inline_table(doc, k)) assign(doc, k, value());
      }
      end_of_line();
    }
    return doc;
  }
};

}  // namespace detail

/// Parses the supported TOML subset: [tables], dotted and quoted keys,
/// basic and literal strings, integers, floats, booleans, arrays (may span
/// lines) and inline tables. Errors carry the 1-based line.
inline Document parse(std::string_view text) { return detail::Parser(text).document(); }

/// Parses a single TOML value. Bare words that are not TOML literals are
/// taken as strings, which keeps `--set data.path=foo.csv` convenient.
inline Value parse_value(std::string_view text) {
  try {
    return detail::Parser(text).lone_value();
  } catch (const ConfigError&) {
    if (text.empty() || text.find_first_of("\"'[]{}\n#") != std::string_view::npos) throw;
    Value v;
    v.str = std::string(text);
    return v;
  }
}

inline Key parse_key(std::string_view text) { return detail::Parser(text).lone_key(); }

}  // namespace aqilung::toml
