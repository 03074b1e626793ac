#pragma once

// Expansions: bounded variants q(m) and q[A->n], succinct CQs, enumeration and
// materialization into plain CQs.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "crpq/common.hpp"
#include "crpq/parser.hpp"
#include "crpq/syntax.hpp"

namespace crpq {

struct SuccinctAtom {
  std::string source;
  Word word;
  u64 exponent = 1;
  std::string target;

  bool operator==(const SuccinctAtom&) const = default;
  auto operator<=>(const SuccinctAtom&) const = default;
  u64 length() const { return mul_sat(word.size(), exponent); }
};

/// Conjunction of atoms x -[w^n]-> y. `variables` also lists isolated variables.
struct SuccinctCQ {
  std::vector<std::string> variables;
  std::vector<SuccinctAtom> atoms;

  bool operator==(const SuccinctCQ&) const = default;

  bool has_variable(const std::string& v) const { return std::binary_search(variables.begin(), variables.end(), v); }
  u64 materialized_size() const {
    u64 s = 0;
    for (const auto& a : atoms) s = add_sat(s, a.length());
    return s;
  }
};

struct CQAtom {
  std::string source;
  Symbol symbol;
  std::string target;

  bool operator==(const CQAtom&) const = default;
  auto operator<=>(const CQAtom&) const = default;
};

/// Plain conjunctive query over single letters.
struct CQ {
  std::vector<std::string> variables;
  std::vector<CQAtom> atoms;

  bool operator==(const CQ&) const = default;
};

// ---------------------------------------------------------------------------
// Bounded variants

namespace detail {

template <class F>
UCRPQ map_labels(const UCRPQ& q, F&& f) {
  UCRPQ out = q;
  for (auto& d : out.disjuncts)
    for (auto& a : d.atoms)
      if (a.kind == Atom::Kind::Edge) a.label = f(a.label);
  return out;
}

}  // namespace detail

/// q(m): every star w* becomes w^{<=m}.
inline UCRPQ bound_query(const UCRPQ& q, u64 m) {
  return detail::map_labels(q, [m](const RegexExpr& e) {
    return e.kind == RegexExpr::Kind::Star ? RegexExpr::power_le(e.word, m) : e;
  });
}

/// q[A->n]: stars a* with a in A become a^{<=n}; other stars stay.
inline UCRPQ bound_letters(const UCRPQ& q, const std::set<Symbol>& letters, u64 n) {
  return detail::map_labels(q, [&](const RegexExpr& e) {
    if (e.kind == RegexExpr::Kind::Star && e.word.size() == 1 && letters.count(e.word[0]))
      return RegexExpr::power_le(e.word, n);
    return e;
  });
}

// ---------------------------------------------------------------------------
// Sums of terms

/// w^e with lo <= e <= hi; hi == kInfinity stands for a star.
struct Segment {
  Word word;
  u64 lo = 1;
  u64 hi = 1;

  bool operator==(const Segment&) const = default;
  bool fixed() const { return lo == hi; }
};

using Term = std::vector<Segment>;

/// Rewrites an expression of the supported fragment as a union of concatenations of
/// segments. Throws CapExceeded when the number of terms exceeds `blowup_cap`.
inline std::vector<Term> normalize_terms(const RegexExpr& e, u64 blowup_cap = Caps{}.branch_blowup) {
  using K = RegexExpr::Kind;
  switch (e.kind) {
    case K::Epsilon: return {Term{}};
    case K::Letter: return {Term{Segment{{e.symbol}, 1, 1}}};
    case K::Power: return {Term{Segment{e.word, e.exponent, e.exponent}}};
    case K::PowerLE: return {Term{Segment{e.word, 0, e.exponent}}};
    case K::Star: return {Term{Segment{e.word, 0, kInfinity}}};
    case K::Union: {
      std::vector<Term> out;
      for (const auto& c : e.children) {
        auto part = normalize_terms(c, blowup_cap);
        out.insert(out.end(), part.begin(), part.end());
        if (out.size() > blowup_cap) throw CapExceeded("union branch blowup");
      }
      return out;
    }
    case K::Concat: {
      std::vector<Term> acc{Term{}};
      for (const auto& c : e.children) {
        auto part = normalize_terms(c, blowup_cap);
        if (acc.size() * part.size() > blowup_cap) throw CapExceeded("union branch blowup");
        std::vector<Term> next;
        for (const auto& t : acc)
          for (const auto& p : part) {
            Term joined = t;
            joined.insert(joined.end(), p.begin(), p.end());
            next.push_back(std::move(joined));
          }
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Normal form

namespace detail {

class UnionFind {
 public:
  std::string find(const std::string& x) {
    auto it = parent_.find(x);
    if (it == parent_.end()) return x;
    if (it->second == x) return x;
    auto root = find(it->second);
    parent_[x] = root;
    return root;
  }
  // Representative: original (non-underscore) names first, then lexicographic.
  void unite(const std::string& a, const std::string& b) {
    auto ra = find(a), rb = find(b);
    if (ra == rb) return;
    if (better(rb, ra)) std::swap(ra, rb);
    parent_[ra] = ra;
    parent_[rb] = ra;
  }

 private:
  static bool better(const std::string& a, const std::string& b) {
    const bool fa = !a.empty() && a[0] == '_', fb = !b.empty() && b[0] == '_';
    if (fa != fb) return !fa;
    return a < b;
  }
  std::map<std::string, std::string> parent_;
};

}  // namespace detail

/// Removes exponent-0 atoms by merging their endpoints, drops duplicate atoms and
/// sorts the variable list. `index_map`, when given, receives for every input atom
/// the index of its image in the output or -1 when it was collapsed away.
inline SuccinctCQ normalize(const SuccinctCQ& in, std::vector<long>* index_map = nullptr) {
  detail::UnionFind uf;
  for (const auto& a : in.atoms)
    if (a.exponent == 0 || a.word.empty()) uf.unite(a.source, a.target);
  SuccinctCQ out;
  std::set<std::string> vars;
  for (const auto& v : in.variables) vars.insert(uf.find(v));
  std::map<SuccinctAtom, long> seen;
  if (index_map) index_map->assign(in.atoms.size(), -1);
  for (std::size_t i = 0; i < in.atoms.size(); ++i) {
    const auto& a = in.atoms[i];
    const auto s = uf.find(a.source), t = uf.find(a.target);
    vars.insert(s);
    vars.insert(t);
    if (a.exponent == 0 || a.word.empty()) continue;
    SuccinctAtom b{s, a.word, a.exponent, t};
    auto [it, fresh] = seen.emplace(b, static_cast<long>(out.atoms.size()));
    if (fresh) out.atoms.push_back(std::move(b));
    if (index_map) (*index_map)[i] = it->second;
  }
  out.variables.assign(vars.begin(), vars.end());
  return out;
}

// ---------------------------------------------------------------------------
// Instantiation of a CRPQ into a succinct expansion

/// Per atom: which union term is taken and the exponent chosen for each of its segments.
struct AtomChoice {
  std::size_t term = 0;
  std::vector<u64> exponents;
};

/// A CRPQ prepared for expansion: collapsed, with every label as a sum of terms.
struct ExpansionSpace {
  CRPQ query;                              // collapsed
  std::vector<std::vector<Term>> terms;    // per atom
  std::vector<std::size_t> recursive;      // indices of star atoms

  explicit ExpansionSpace(const CRPQ& q, u64 blowup_cap = Caps{}.branch_blowup) : query(collapse(q)) {
    for (std::size_t i = 0; i < query.atoms.size(); ++i) {
      terms.push_back(normalize_terms(query.atoms[i].label, blowup_cap));
      if (is_recursive(query.atoms[i])) recursive.push_back(i);
    }
  }

  /// Builds the expansion for the given choices. `star_image`, when given, receives
  /// for each recursive atom (in `recursive` order) the index of its atom in the
  /// result, or -1 when its exponent is 0.
  SuccinctCQ instantiate(const std::vector<AtomChoice>& choice, std::vector<long>* star_image = nullptr) const {
    std::set<std::string> originals;
    for (const auto& v : variables(query)) originals.insert(v);
    auto fresh = [&](std::size_t atom, std::size_t seg) {
      std::string name = "_m" + std::to_string(atom) + "_" + std::to_string(seg);
      while (originals.count(name)) name += "_";
      return name;
    };
    SuccinctCQ raw;
    raw.variables.assign(originals.begin(), originals.end());
    std::vector<long> raw_star(recursive.size(), -1);
    for (std::size_t i = 0; i < query.atoms.size(); ++i) {
      const auto& atom = query.atoms[i];
      const auto& term = terms[i].at(choice[i].term);
      // Merge consecutive pieces: equal words add exponents, single copies concatenate.
      std::vector<std::pair<Word, u64>> pieces;
      for (std::size_t s = 0; s < term.size(); ++s) {
        const u64 e = choice[i].exponents.at(s);
        if (e == 0) continue;
        if (!pieces.empty() && pieces.back().first == term[s].word) {
          pieces.back().second = add_checked(pieces.back().second, e);
        } else if (!pieces.empty() && pieces.back().second == 1 && e == 1) {
          pieces.back().first.insert(pieces.back().first.end(), term[s].word.begin(), term[s].word.end());
        } else {
          pieces.emplace_back(term[s].word, e);
        }
      }
      const auto rec = std::find(recursive.begin(), recursive.end(), i);
      if (pieces.empty()) {
        raw.atoms.push_back({atom.source, {}, 0, atom.target});
        continue;
      }
      std::string prev = atom.source;
      for (std::size_t p = 0; p < pieces.size(); ++p) {
        const std::string next = p + 1 == pieces.size() ? atom.target : fresh(i, p + 1);
        if (next != atom.target) raw.variables.push_back(next);
        if (rec != recursive.end()) raw_star[rec - recursive.begin()] = static_cast<long>(raw.atoms.size());
        raw.atoms.push_back({prev, pieces[p].first, pieces[p].second, next});
        prev = next;
      }
    }
    std::sort(raw.variables.begin(), raw.variables.end());
    std::vector<long> index_map;
    auto out = normalize(raw, &index_map);
    if (star_image) {
      star_image->assign(recursive.size(), -1);
      for (std::size_t r = 0; r < recursive.size(); ++r)
        if (raw_star[r] >= 0) (*star_image)[r] = index_map[raw_star[r]];
    }
    return out;
  }
};

/// Candidate exponents for each recursive atom, in atom order.
using ExponentDomain = std::vector<std::vector<u64>>;

/// Calls `fn` on every expansion of `q` whose star exponents are drawn from `dom`,
/// in lexicographic order over (atom, branch/exponent). `fn` returns false to stop.
/// Throws CapExceeded once more than `cap` expansions would be produced.
inline void for_each_expansion(const CRPQ& q, const ExponentDomain& dom, u64 cap,
                               const std::function<bool(const SuccinctCQ&)>& fn,
                               u64 blowup_cap = Caps{}.branch_blowup) {
  ExpansionSpace space(q, blowup_cap);
  if (dom.size() != space.recursive.size()) throw InvalidArgument("exponent domain must cover every star atom");
  for (const auto& d : dom)
    if (d.empty()) throw InvalidArgument("empty exponent set");

  // Flatten every atom into a list of alternatives (term, exponents).
  std::vector<std::vector<AtomChoice>> options(space.query.atoms.size());
  for (std::size_t i = 0; i < space.query.atoms.size(); ++i) {
    const auto rec = std::find(space.recursive.begin(), space.recursive.end(), i);
    if (rec != space.recursive.end()) {
      for (u64 e : dom[rec - space.recursive.begin()]) options[i].push_back({0, {e}});
      continue;
    }
    for (std::size_t t = 0; t < space.terms[i].size(); ++t) {
      const auto& term = space.terms[i][t];
      std::vector<u64> exps(term.size());
      for (std::size_t s = 0; s < term.size(); ++s) {
        if (term[s].hi == kInfinity) throw InvalidArgument("star nested inside a larger expression");
        exps[s] = term[s].lo;
      }
      while (true) {
        options[i].push_back({t, exps});
        if (options[i].size() > cap) throw CapExceeded("expansions");
        bool advanced = false;
        for (std::size_t s = term.size(); s-- > 0;) {
          if (exps[s] < term[s].hi) {
            ++exps[s];
            for (std::size_t r = s + 1; r < term.size(); ++r) exps[r] = term[r].lo;
            advanced = true;
            break;
          }
        }
        if (!advanced) break;
      }
    }
  }

  std::vector<std::size_t> idx(options.size(), 0);
  std::vector<AtomChoice> choice(options.size());
  u64 produced = 0;
  while (true) {
    for (std::size_t i = 0; i < options.size(); ++i) choice[i] = options[i][idx[i]];
    if (++produced > cap) throw CapExceeded("expansions");
    if (!fn(space.instantiate(choice))) return;
    std::size_t i = options.size();
    while (i > 0) {
      --i;
      if (++idx[i] < options[i].size()) break;
      idx[i] = 0;
      if (i == 0) return;
    }
    if (options.empty()) return;
  }
}

inline std::vector<SuccinctCQ> enumerate_expansions(const CRPQ& q, const ExponentDomain& dom, u64 cap) {
  std::vector<SuccinctCQ> out;
  for_each_expansion(q, dom, cap, [&](const SuccinctCQ& l) {
    out.push_back(l);
    return true;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Materialization

/// w-expansion of a single atom: a path of single-letter atoms through fresh
/// variables z<k>, or an equality when w is empty.
struct AtomExpansion {
  bool equality = false;
  std::vector<CQAtom> path;
};

inline AtomExpansion atom_expansion(const std::string& x, const std::string& y, const Word& w,
                                    const std::set<std::string>& taken = {}) {
  AtomExpansion out;
  if (w.empty()) {
    out.equality = true;
    return out;
  }
  u64 counter = 0;
  auto next_fresh = [&] {
    std::string name;
    do name = "z" + std::to_string(++counter);
    while (taken.count(name) || name == x || name == y);
    return name;
  };
  std::string prev = x;
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::string next = i + 1 == w.size() ? y : next_fresh();
    out.path.push_back({prev, w[i], next});
    prev = next;
  }
  return out;
}

inline AtomExpansion atom_expansion(const Atom& atom, const Word& w, const std::set<std::string>& taken = {}) {
  if (atom.kind != Atom::Kind::Edge) throw InvalidArgument("equality atoms have no word expansion");
  return atom_expansion(atom.source, atom.target, w, taken);
}

/// Unrolls every w^n into explicit single-letter atoms. Path variables are named
/// z1, z2, ... in atom order, skipping names already used by the query.
inline CQ materialize(const SuccinctCQ& l, u64 cap = Caps{}.materialized_atoms) {
  if (l.materialized_size() > cap) throw CapExceeded("materialized atoms");
  std::set<std::string> taken(l.variables.begin(), l.variables.end());
  for (const auto& a : l.atoms) {
    taken.insert(a.source);
    taken.insert(a.target);
  }
  CQ out;
  std::set<std::string> vars = taken;
  u64 counter = 0;
  auto next_fresh = [&] {
    std::string name;
    do name = "z" + std::to_string(++counter);
    while (taken.count(name));
    vars.insert(name);
    return name;
  };
  for (const auto& a : l.atoms) {
    const u64 len = a.length();
    if (len == 0) throw InvalidArgument("materialize expects a normalized succinct CQ");
    std::string prev = a.source;
    u64 k = 0;
    for (u64 rep = 0; rep < a.exponent; ++rep)
      for (const auto& s : a.word) {
        ++k;
        std::string next = k == len ? a.target : next_fresh();
        out.atoms.push_back({prev, s, next});
        prev = next;
      }
  }
  out.variables.assign(vars.begin(), vars.end());
  return out;
}

// ---------------------------------------------------------------------------
// Text form

inline std::string render(const SuccinctCQ& l) {
  std::string out;
  std::set<std::string> touched;
  for (const auto& a : l.atoms) {
    if (!out.empty()) out += ", ";
    out += "?" + a.source + " -[" + detail::render_word_base(a.word) + "^" + std::to_string(a.exponent) + "]-> ?" + a.target;
    touched.insert(a.source);
    touched.insert(a.target);
  }
  for (const auto& v : l.variables) {
    if (touched.count(v)) continue;
    if (!out.empty()) out += ", ";
    out += "?" + v + " = ?" + v;
  }
  return out;
}

inline std::string render(const CQ& q) {
  SuccinctCQ l;
  l.variables = q.variables;
  for (const auto& a : q.atoms) l.atoms.push_back({a.source, {a.symbol}, 1, a.target});
  return render(l);
}

/// The succinct CQ as a query (one w^n label per atom).
inline CRPQ to_crpq(const SuccinctCQ& l) {
  CRPQ q;
  std::set<std::string> touched;
  for (const auto& a : l.atoms) {
    q.atoms.push_back(Atom::edge(a.source, RegexExpr::power(a.word, a.exponent), a.target));
    touched.insert(a.source);
    touched.insert(a.target);
  }
  for (const auto& v : l.variables)
    if (!touched.count(v)) q.atoms.push_back(Atom::equality(v, v));
  return q;
}

/// Reads a conjunction whose labels are w^n, literal words, or eps; equalities merge variables.
inline SuccinctCQ to_succinct_cq(const CRPQ& q) {
  SuccinctCQ raw;
  std::set<std::string> vars;
  for (const auto& a : q.atoms) {
    vars.insert(a.source);
    vars.insert(a.target);
    if (a.kind == Atom::Kind::Equality) {
      raw.atoms.push_back({a.source, {}, 0, a.target});
      continue;
    }
    if (a.label.kind == RegexExpr::Kind::Power) {
      raw.atoms.push_back({a.source, a.label.word, a.label.exponent, a.target});
      continue;
    }
    auto w = as_literal_word(a.label);
    if (!w) throw InvalidArgument("succinct CQ labels must be w^n or a literal word: " + render(a.label));
    raw.atoms.push_back({a.source, *w, w->empty() ? 0u : 1u, a.target});
  }
  raw.variables.assign(vars.begin(), vars.end());
  return normalize(raw);
}

inline SuccinctCQ parse_succinct_cq(std::string_view text) { return to_succinct_cq(parse_crpq(text)); }

}  // namespace crpq
