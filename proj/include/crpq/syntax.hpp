#pragma once

// Query data model for unions of conjunctive regular path queries over the
// succinct star-free / word-star fragment.

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crpq/common.hpp"

namespace crpq {

using Symbol = std::string;
using Word = std::vector<Symbol>;

enum class FragmentClass { ASingleton, WSingleton, SF, SSF, AStar, WStar, Unsupported };

inline const char* to_string(FragmentClass c) {
  switch (c) {
    case FragmentClass::ASingleton: return "aSingleton";
    case FragmentClass::WSingleton: return "wSingleton";
    case FragmentClass::SF: return "SF";
    case FragmentClass::SSF: return "SSF";
    case FragmentClass::AStar: return "aStar";
    case FragmentClass::WStar: return "wStar";
    case FragmentClass::Unsupported: return "unsupported";
  }
  return "?";
}

/// Inclusion between fragment classes: aSingleton < wSingleton < SF < SSF, aStar < wStar.
inline bool class_leq(FragmentClass a, FragmentClass b) {
  if (a == b) return true;
  if (b == FragmentClass::Unsupported) return true;
  auto rank = [](FragmentClass c) {
    switch (c) {
      case FragmentClass::ASingleton: return 0;
      case FragmentClass::WSingleton: return 1;
      case FragmentClass::SF: return 2;
      case FragmentClass::SSF: return 3;
      default: return -1;
    }
  };
  if (a == FragmentClass::AStar && b == FragmentClass::WStar) return true;
  const int ra = rank(a), rb = rank(b);
  return ra >= 0 && rb >= 0 && ra <= rb;
}

struct RegexExpr {
  enum class Kind { Epsilon, Letter, Concat, Union, Power, PowerLE, Star };

  Kind kind = Kind::Epsilon;
  Symbol symbol;                     // Letter
  std::vector<RegexExpr> children;   // Concat, Union
  Word word;                         // Power, PowerLE, Star
  u64 exponent = 0;                  // Power, PowerLE

  bool operator==(const RegexExpr&) const = default;

  static RegexExpr epsilon() { return {}; }
  static RegexExpr letter(Symbol s) {
    RegexExpr e;
    e.kind = Kind::Letter;
    e.symbol = std::move(s);
    return e;
  }
  static RegexExpr concat(std::vector<RegexExpr> parts) {
    if (parts.size() < 2) throw InvalidArgument("concatenation needs at least two operands");
    RegexExpr e;
    e.kind = Kind::Concat;
    e.children = std::move(parts);
    return e;
  }
  static RegexExpr alt(std::vector<RegexExpr> parts) {
    if (parts.size() < 2) throw InvalidArgument("union needs at least two operands");
    RegexExpr e;
    e.kind = Kind::Union;
    e.children = std::move(parts);
    return e;
  }
  static RegexExpr power(Word w, u64 n) {
    if (w.empty()) throw InvalidArgument("power over the empty word");
    RegexExpr e;
    e.kind = Kind::Power;
    e.word = std::move(w);
    e.exponent = n;
    return e;
  }
  static RegexExpr power_le(Word w, u64 n) {
    if (w.empty()) throw InvalidArgument("bounded power over the empty word");
    RegexExpr e;
    e.kind = Kind::PowerLE;
    e.word = std::move(w);
    e.exponent = n;
    return e;
  }
  static RegexExpr star(Word w) {
    if (w.empty()) throw InvalidArgument("star over the empty word");
    RegexExpr e;
    e.kind = Kind::Star;
    e.word = std::move(w);
    return e;
  }
  // Literal word as an expression: ε, a single letter, or a concatenation of letters.
  static RegexExpr literal(const Word& w) {
    if (w.empty()) return epsilon();
    if (w.size() == 1) return letter(w[0]);
    std::vector<RegexExpr> parts;
    for (const auto& s : w) parts.push_back(letter(s));
    return concat(std::move(parts));
  }
};

struct Atom {
  enum class Kind { Edge, Equality };

  Kind kind = Kind::Edge;
  std::string source;
  std::string target;
  RegexExpr label;  // Edge only

  bool operator==(const Atom&) const = default;

  static Atom edge(std::string x, RegexExpr label, std::string y) {
    return Atom{Kind::Edge, std::move(x), std::move(y), std::move(label)};
  }
  static Atom equality(std::string x, std::string y) { return Atom{Kind::Equality, std::move(x), std::move(y), {}}; }
};

/// Boolean conjunctive regular path query: every variable is existential.
struct CRPQ {
  std::vector<Atom> atoms;
  bool operator==(const CRPQ&) const = default;
};

struct UCRPQ {
  std::vector<CRPQ> disjuncts;
  bool operator==(const UCRPQ&) const = default;
};

// ---------------------------------------------------------------------------
// Inspection

inline std::vector<std::string> variables(const CRPQ& q) {
  std::set<std::string> vs;
  for (const auto& a : q.atoms) {
    vs.insert(a.source);
    vs.insert(a.target);
  }
  return {vs.begin(), vs.end()};
}

inline u64 nratoms(const CRPQ& q) { return q.atoms.size(); }
inline u64 nrvars(const CRPQ& q) { return variables(q).size(); }

inline void collect_symbols(const RegexExpr& e, std::set<Symbol>& out) {
  switch (e.kind) {
    case RegexExpr::Kind::Epsilon: break;
    case RegexExpr::Kind::Letter: out.insert(e.symbol); break;
    case RegexExpr::Kind::Concat:
    case RegexExpr::Kind::Union:
      for (const auto& c : e.children) collect_symbols(c, out);
      break;
    default: out.insert(e.word.begin(), e.word.end());
  }
}

inline std::set<Symbol> alphabet(const CRPQ& q) {
  std::set<Symbol> out;
  for (const auto& a : q.atoms)
    if (a.kind == Atom::Kind::Edge) collect_symbols(a.label, out);
  return out;
}

inline std::set<Symbol> alphabet(const UCRPQ& q) {
  std::set<Symbol> out;
  for (const auto& d : q.disjuncts) {
    auto s = alphabet(d);
    out.insert(s.begin(), s.end());
  }
  return out;
}

// If e denotes a single literal word, return it.
inline std::optional<Word> as_literal_word(const RegexExpr& e) {
  switch (e.kind) {
    case RegexExpr::Kind::Epsilon: return Word{};
    case RegexExpr::Kind::Letter: return Word{e.symbol};
    case RegexExpr::Kind::Concat: {
      Word w;
      for (const auto& c : e.children) {
        auto part = as_literal_word(c);
        if (!part) return std::nullopt;
        w.insert(w.end(), part->begin(), part->end());
      }
      return w;
    }
    default: return std::nullopt;
  }
}

inline FragmentClass classify(const RegexExpr& e) {
  using K = RegexExpr::Kind;
  switch (e.kind) {
    case K::Letter: return FragmentClass::ASingleton;
    case K::Epsilon: return FragmentClass::WSingleton;
    case K::Star: return e.word.size() == 1 ? FragmentClass::AStar : FragmentClass::WStar;
    case K::Power:
    case K::PowerLE: return FragmentClass::SSF;
    case K::Concat:
    case K::Union: {
      bool succinct = false;
      for (const auto& c : e.children) {
        const auto k = classify(c);
        if (k == FragmentClass::Unsupported || k == FragmentClass::AStar || k == FragmentClass::WStar)
          return FragmentClass::Unsupported;
        if (k == FragmentClass::SSF) succinct = true;
      }
      if (succinct) return FragmentClass::SSF;
      if (e.kind == K::Concat && as_literal_word(e)) return FragmentClass::WSingleton;
      return FragmentClass::SF;
    }
  }
  return FragmentClass::Unsupported;
}

inline bool is_star_free(FragmentClass c) { return class_leq(c, FragmentClass::SSF) && c != FragmentClass::Unsupported; }
inline bool is_recursive(const Atom& a) { return a.kind == Atom::Kind::Edge && a.label.kind == RegexExpr::Kind::Star; }

/// Every edge label lies in SSF or is a star over a word (letter when `letters_only`).
inline bool in_ssf_wstar(const UCRPQ& q, bool letters_only = false) {
  for (const auto& d : q.disjuncts)
    for (const auto& a : d.atoms) {
      if (a.kind != Atom::Kind::Edge) continue;
      const auto c = classify(a.label);
      if (c == FragmentClass::Unsupported) return false;
      if (letters_only && c == FragmentClass::WStar) return false;
    }
  return true;
}

inline bool is_star_free(const UCRPQ& q) {
  for (const auto& d : q.disjuncts)
    for (const auto& a : d.atoms)
      if (a.kind == Atom::Kind::Edge && !is_star_free(classify(a.label))) return false;
  return true;
}

/// Symbols needed to encode the expression; exponents are charged in binary.
inline u64 size(const RegexExpr& e) {
  using K = RegexExpr::Kind;
  switch (e.kind) {
    case K::Epsilon:
    case K::Letter: return 1;
    case K::Concat:
    case K::Union: {
      u64 s = 0;
      for (const auto& c : e.children) s += size(c);
      return s;
    }
    case K::Power:
    case K::PowerLE: return e.word.size() + ceil_log2(e.exponent);
    case K::Star: return e.word.size();
  }
  return 0;
}

inline u64 size(const CRPQ& q) {
  u64 s = 0;
  for (const auto& a : q.atoms)
    if (a.kind == Atom::Kind::Edge) s += size(a.label);
  return s;
}

inline u64 size(const UCRPQ& q) {
  u64 s = 0;
  for (const auto& d : q.disjuncts) s += size(d);
  return s;
}

/// Length of the longest word of a star-free expression (its materialized length).
inline u64 longest_word(const RegexExpr& e) {
  using K = RegexExpr::Kind;
  switch (e.kind) {
    case K::Epsilon: return 0;
    case K::Letter: return 1;
    case K::Concat: {
      u64 s = 0;
      for (const auto& c : e.children) s = add_sat(s, longest_word(c));
      return s;
    }
    case K::Union: {
      u64 s = 0;
      for (const auto& c : e.children) s = std::max(s, longest_word(c));
      return s;
    }
    case K::Power:
    case K::PowerLE: return mul_sat(e.word.size(), e.exponent);
    case K::Star: return kInfinity;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline bool plain_symbol(const Symbol& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '_'; });
}

inline std::string render_symbol(const Symbol& s) { return plain_symbol(s) ? s : "'" + s + "'"; }

// Juxtaposes rendered pieces; a lone "e" followed by "ps" would otherwise lex as ε.
inline std::string join_pieces(const std::vector<std::string>& pieces) {
  std::string out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    out += pieces[i];
    if (i + 1 < pieces.size()) {
      std::string rest;
      for (std::size_t j = i + 1; j < pieces.size() && rest.size() < 2; ++j) rest += pieces[j];
      if (pieces[i] == "e" && rest.rfind("ps", 0) == 0) out += ' ';
    }
  }
  return out;
}

inline std::string render_word(const Word& w) {
  std::vector<std::string> pieces;
  for (const auto& s : w) pieces.push_back(render_symbol(s));
  return join_pieces(pieces);
}

inline std::string render_word_base(const Word& w) {
  if (w.size() == 1) return render_symbol(w[0]);
  return "(" + render_word(w) + ")";
}

}  // namespace detail

inline std::string render(const RegexExpr& e) {
  using K = RegexExpr::Kind;
  switch (e.kind) {
    case K::Epsilon: return "eps";
    case K::Letter: return detail::render_symbol(e.symbol);
    case K::Concat: {
      std::vector<std::string> pieces;
      for (const auto& c : e.children) {
        auto r = render(c);
        if (c.kind == K::Union) r = "(" + r + ")";
        pieces.push_back(std::move(r));
      }
      return detail::join_pieces(pieces);
    }
    case K::Union: {
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += "+";
        out += render(e.children[i]);
      }
      return out;
    }
    case K::Power: return detail::render_word_base(e.word) + "^" + std::to_string(e.exponent);
    case K::PowerLE: return detail::render_word_base(e.word) + "^<=" + std::to_string(e.exponent);
    case K::Star: return detail::render_word_base(e.word) + "*";
  }
  return "";
}

inline std::string render(const Atom& a) {
  if (a.kind == Atom::Kind::Equality) return "?" + a.source + " = ?" + a.target;
  return "?" + a.source + " -[" + render(a.label) + "]-> ?" + a.target;
}

inline std::string render(const CRPQ& q) {
  std::string out;
  for (std::size_t i = 0; i < q.atoms.size(); ++i) {
    if (i) out += ", ";
    out += render(q.atoms[i]);
  }
  return out;
}

inline std::string render(const UCRPQ& q) {
  std::string out;
  for (std::size_t i = 0; i < q.disjuncts.size(); ++i) {
    if (i) out += " | ";
    out += render(q.disjuncts[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transformations

/// Merges variables forced equal by equality atoms; each class is renamed to its
/// lexicographically least member.
inline CRPQ collapse(const CRPQ& q) {
  std::map<std::string, std::string> parent;
  auto find = [&](std::string x) {
    while (true) {
      auto it = parent.find(x);
      if (it == parent.end() || it->second == x) return x;
      x = it->second;
    }
  };
  for (const auto& a : q.atoms) {
    parent.emplace(a.source, a.source);
    parent.emplace(a.target, a.target);
  }
  for (const auto& a : q.atoms) {
    if (a.kind != Atom::Kind::Equality) continue;
    auto rx = find(a.source), ry = find(a.target);
    if (rx == ry) continue;
    if (ry < rx) std::swap(rx, ry);
    parent[ry] = rx;
  }
  CRPQ out;
  for (const auto& a : q.atoms) {
    if (a.kind == Atom::Kind::Equality) continue;
    out.atoms.push_back(Atom::edge(find(a.source), a.label, find(a.target)));
  }
  // A query made only of equalities keeps one variable alive through an ε-loop.
  if (out.atoms.empty() && !q.atoms.empty()) {
    const auto v = find(q.atoms.front().source);
    out.atoms.push_back(Atom::edge(v, RegexExpr::epsilon(), v));
  }
  return out;
}

inline UCRPQ collapse(const UCRPQ& q) {
  UCRPQ out;
  for (const auto& d : q.disjuncts) out.disjuncts.push_back(collapse(d));
  return out;
}

/// Turns designated free variables into existential ones tagged by a self-loop on a
/// fresh symbol per variable. `fresh` may supply the symbols; otherwise F1, F2, ... are used.
inline UCRPQ reduce_free_vars(const UCRPQ& q, const std::vector<std::string>& free_vars,
                              std::vector<Symbol> fresh = {}) {
  const auto sigma = alphabet(q);
  if (fresh.empty())
    for (std::size_t i = 0; i < free_vars.size(); ++i) fresh.push_back("F" + std::to_string(i + 1));
  if (fresh.size() != free_vars.size()) throw InvalidArgument("one fresh symbol per free variable is required");
  std::set<Symbol> seen;
  for (const auto& s : fresh) {
    if (sigma.count(s)) throw InvalidArgument("fresh symbol '" + s + "' clashes with the query alphabet");
    if (!seen.insert(s).second) throw InvalidArgument("fresh symbols must be distinct");
  }
  UCRPQ out = q;
  for (auto& d : out.disjuncts) {
    const auto vars = variables(d);
    for (std::size_t i = 0; i < free_vars.size(); ++i) {
      if (!std::binary_search(vars.begin(), vars.end(), free_vars[i]))
        throw InvalidArgument("free variable ?" + free_vars[i] + " does not occur in every disjunct");
      d.atoms.push_back(Atom::edge(free_vars[i], RegexExpr::letter(fresh[i]), free_vars[i]));
    }
  }
  return out;
}

}  // namespace crpq
