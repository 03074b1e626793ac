#pragma once

// Recursive-descent parser for the query grammar.
//
//   query  := crpq ( "|" crpq )*
//   crpq   := atom ( "," atom )*
//   atom   := VAR ( edge VAR )+  |  VAR "=" VAR
//   edge   := "-[" regex "]->"  |  "<-[" regex "]-"
//   regex  := term ( "+" term )*
//   term   := factor+
//   factor := base ( "^" NAT | "^<=" NAT | "*" )?
//   base   := SYMBOL | "'" IDENT "'" | "eps" | "(" regex ")"
//
// A SYMBOL is one letter optionally followed by digits and underscores, so `ab`
// reads as two symbols and `x1`, `y_2` read as one. Longer names are quoted.
// Chains `?a -[r]-> ?b -[s]-> ?c` and reversed edges `?b <-[r]- ?a` are sugar
// for plain forward atoms. `#` starts a comment that runs to the end of the line.

#include <cctype>
#include <string>
#include <string_view>

#include "crpq/syntax.hpp"

namespace crpq {

namespace detail {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool starts_with(std::string_view s) {
    skip_ws();
    return text_.substr(pos_, s.size()) == s;
  }

  bool accept(std::string_view s) {
    if (!starts_with(s)) return false;
    for (std::size_t i = 0; i < s.size(); ++i) advance();
    return true;
  }

  void expect(std::string_view s) {
    if (!accept(s)) fail("expected '" + std::string(s) + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  std::string identifier() {
    std::string out;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      out += text_[pos_];
      advance();
    }
    return out;
  }

  std::string variable() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != '?') fail("expected variable");
    advance();
    auto name = identifier();
    if (name.empty()) fail("empty variable name");
    return name;
  }

  u64 natural() {
    skip_ws();
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) fail("expected number");
    u64 v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      const u64 d = static_cast<u64>(text_[pos_] - '0');
      if (v > (kInfinity - d) / 10) fail("number out of range");
      v = v * 10 + d;
      advance();
    }
    return v;
  }

  // Symbol at the cursor, or empty when the cursor does not start one. Sets `is_eps` for the keyword.
  std::string symbol(bool& is_eps) {
    skip_ws();
    is_eps = false;
    if (pos_ >= text_.size()) return {};
    if (text_[pos_] == '\'') {
      advance();
      auto name = identifier();
      if (name.empty()) fail("empty quoted symbol");
      if (pos_ >= text_.size() || text_[pos_] != '\'') fail("unterminated quoted symbol");
      advance();
      return name;
    }
    if (!std::isalpha(static_cast<unsigned char>(text_[pos_]))) return {};
    if (text_.substr(pos_, 3) == "eps") {
      for (int i = 0; i < 3; ++i) advance();
      is_eps = true;
      return "eps";
    }
    std::string out(1, text_[pos_]);
    advance();
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      out += text_[pos_];
      advance();
    }
    return out;
  }

  std::size_t line() const { return line_; }
  std::size_t column() const { return col_; }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

inline void append_flat(std::vector<RegexExpr>& out, RegexExpr e, RegexExpr::Kind kind) {
  if (e.kind == kind) {
    for (auto& c : e.children) out.push_back(std::move(c));
  } else {
    out.push_back(std::move(e));
  }
}

inline RegexExpr parse_regex(Cursor& cur);

inline bool starts_factor(Cursor& cur) {
  const char c = cur.peek();
  return c == '(' || c == '\'' || std::isalpha(static_cast<unsigned char>(c));
}

inline RegexExpr parse_factor(Cursor& cur) {
  RegexExpr base;
  const auto line = cur.line(), col = cur.column();
  if (cur.accept("(")) {
    base = parse_regex(cur);
    cur.expect(")");
  } else {
    bool is_eps = false;
    auto s = cur.symbol(is_eps);
    if (s.empty()) cur.fail("expected symbol, 'eps' or '('");
    base = is_eps ? RegexExpr::epsilon() : RegexExpr::letter(std::move(s));
  }
  auto word_of_base = [&](const char* what) {
    auto w = as_literal_word(base);
    if (!w) throw ParseError(std::string(what) + " over non-word", line, col);
    if (w->empty()) throw ParseError(std::string(what) + " over empty word", line, col);
    return *w;
  };
  if (cur.accept("^<=")) {
    auto w = word_of_base("power");
    return RegexExpr::power_le(std::move(w), cur.natural());
  }
  if (cur.accept("^")) {
    auto w = word_of_base("power");
    return RegexExpr::power(std::move(w), cur.natural());
  }
  if (cur.accept("*")) return RegexExpr::star(word_of_base("star"));
  return base;
}

inline RegexExpr parse_term(Cursor& cur) {
  std::vector<RegexExpr> parts;
  append_flat(parts, parse_factor(cur), RegexExpr::Kind::Concat);
  while (starts_factor(cur)) append_flat(parts, parse_factor(cur), RegexExpr::Kind::Concat);
  if (parts.size() == 1) return std::move(parts[0]);
  return RegexExpr::concat(std::move(parts));
}

inline RegexExpr parse_regex(Cursor& cur) {
  std::vector<RegexExpr> parts;
  append_flat(parts, parse_term(cur), RegexExpr::Kind::Union);
  while (cur.accept("+")) append_flat(parts, parse_term(cur), RegexExpr::Kind::Union);
  if (parts.size() == 1) return std::move(parts[0]);
  return RegexExpr::alt(std::move(parts));
}

inline void parse_atom_chain(Cursor& cur, CRPQ& q) {
  auto left = cur.variable();
  if (cur.accept("=")) {
    q.atoms.push_back(Atom::equality(left, cur.variable()));
    return;
  }
  bool any = false;
  while (true) {
    if (cur.accept("-[")) {
      auto label = parse_regex(cur);
      cur.expect("]->");
      auto right = cur.variable();
      q.atoms.push_back(Atom::edge(left, std::move(label), right));
      left = std::move(right);
    } else if (cur.accept("<-[")) {
      auto label = parse_regex(cur);
      cur.expect("]-");
      auto right = cur.variable();
      q.atoms.push_back(Atom::edge(right, std::move(label), left));
      left = std::move(right);
    } else {
      break;
    }
    any = true;
  }
  if (!any) cur.fail("expected '-[', '<-[' or '='");
}

}  // namespace detail

inline RegexExpr parse_regex(std::string_view text) {
  detail::Cursor cur(text);
  auto e = detail::parse_regex(cur);
  if (!cur.at_end()) cur.fail("trailing input");
  return e;
}

inline UCRPQ parse_ucrpq(std::string_view text) {
  detail::Cursor cur(text);
  UCRPQ out;
  do {
    CRPQ q;
    do {
      detail::parse_atom_chain(cur, q);
    } while (cur.accept(","));
    out.disjuncts.push_back(std::move(q));
  } while (cur.accept("|"));
  if (!cur.at_end()) cur.fail("unexpected input");
  return out;
}

inline CRPQ parse_crpq(std::string_view text) {
  auto q = parse_ucrpq(text);
  if (q.disjuncts.size() != 1) throw InvalidArgument("expected a single conjunctive query");
  return std::move(q.disjuncts[0]);
}

/// Word in symbol syntax, e.g. `ab`, `x1 y1`, `eps`.
inline Word parse_word(std::string_view text) {
  auto e = parse_regex(text);
  auto w = as_literal_word(e);
  if (!w) throw InvalidArgument("not a literal word: " + std::string(text));
  return *w;
}

}  // namespace crpq
