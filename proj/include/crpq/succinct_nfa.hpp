#pragma once

// Automata whose transitions read w^n with n kept in binary, and the test
// "does the automaton accept v^m" without unrolling any power.

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crpq/common.hpp"
#include "crpq/expansion.hpp"
#include "crpq/length_set.hpp"
#include "crpq/parser.hpp"
#include "crpq/syntax.hpp"

namespace crpq {

struct NfaTransition {
  std::size_t from = 0;
  Word word;
  u64 exponent = 1;
  std::size_t to = 0;

  bool operator==(const NfaTransition&) const = default;
  u64 length() const { return mul_checked(word.size(), exponent); }
};

struct SuccinctNFA {
  std::vector<std::string> states;
  std::vector<NfaTransition> transitions;
  std::size_t initial = 0;
  std::set<std::size_t> finals;

  std::size_t num_states() const { return states.size(); }

  std::size_t add_state(std::string name) {
    states.push_back(std::move(name));
    return states.size() - 1;
  }

  std::optional<std::size_t> find_state(const std::string& name) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i] == name) return i;
    return std::nullopt;
  }

  void add_transition(std::size_t from, Word w, u64 n, std::size_t to) {
    transitions.push_back({from, std::move(w), n, to});
  }
};

/// w[i..j): the letters a_{i+1} ... a_j, empty when j <= i.
inline Word factor(const Word& w, std::size_t i, std::size_t j) {
  if (i > w.size() || j > w.size()) throw InvalidArgument("factor index out of range");
  if (j <= i) return {};
  return Word(w.begin() + static_cast<std::ptrdiff_t>(i), w.begin() + static_cast<std::ptrdiff_t>(j));
}

/// Offsets of v^omega modulo |v|: reading one copy of w from offset i either fails
/// or lands on offset (i + |w|) mod |v|. Reading w^n is a walk of n steps.
class PositionGraph {
 public:
  PositionGraph(const Word& w, const Word& v) : next_(v.size(), -1) {
    if (v.empty()) throw InvalidArgument("position graph over the empty word");
    const std::size_t k = v.size();
    for (std::size_t i = 0; i < k; ++i) {
      bool ok = true;
      for (std::size_t t = 0; t < w.size() && ok; ++t) ok = w[t] == v[(i + t) % k];
      if (ok) next_[i] = static_cast<long>((i + w.size()) % k);
    }
  }

  std::size_t size() const { return next_.size(); }
  std::optional<std::size_t> step(std::size_t i) const {
    return next_[i] < 0 ? std::nullopt : std::optional<std::size_t>(static_cast<std::size_t>(next_[i]));
  }

  /// Offset reached after reading w^n from offset i, if the whole power matches.
  std::optional<std::size_t> follow(std::size_t i, u64 n) const {
    std::vector<u64> seen_at(next_.size(), kInfinity);
    std::size_t pos = i;
    for (u64 taken = 0;; ++taken) {
      if (taken == n) return pos;
      if (seen_at[pos] != kInfinity) {
        const u64 cycle = taken - seen_at[pos];
        u64 rest = (n - taken) % cycle;
        while (rest-- > 0) pos = static_cast<std::size_t>(next_[pos]);
        return pos;
      }
      seen_at[pos] = taken;
      if (next_[pos] < 0) return std::nullopt;
      pos = static_cast<std::size_t>(next_[pos]);
    }
  }

 private:
  std::vector<long> next_;
};

/// Drops empty transitions (exponent 0 or empty word) by epsilon closure.
inline SuccinctNFA remove_empty_transitions(const SuccinctNFA& a) {
  const std::size_t n = a.num_states();
  std::vector<std::vector<std::size_t>> eps(n);
  bool any = false;
  for (const auto& t : a.transitions)
    if (t.exponent == 0 || t.word.empty()) {
      eps[t.from].push_back(t.to);
      any = true;
    }
  if (!any) return a;
  std::vector<std::vector<bool>> closure(n, std::vector<bool>(n, false));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> stack{s};
    closure[s][s] = true;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto w : eps[v])
        if (!closure[s][w]) {
          closure[s][w] = true;
          stack.push_back(w);
        }
    }
  }
  SuccinctNFA out;
  out.states = a.states;
  out.initial = a.initial;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t p = 0; p < n; ++p) {
      if (!closure[s][p]) continue;
      if (a.finals.count(p)) out.finals.insert(s);
      for (const auto& t : a.transitions)
        if (t.from == p && t.exponent > 0 && !t.word.empty()) out.transitions.push_back({s, t.word, t.exponent, t.to});
    }
  return out;
}

/// Product with the powers of v: state (q, i) means "in q, at offset i of v^omega".
/// A transition w^n from (q, i) exists when w^n is the factor of v^omega starting at i.
/// Initial (q0, 0), finals F x {0}; only states reachable from the initial one are kept.
inline SuccinctNFA build_product(const SuccinctNFA& nfa_in, const Word& v) {
  if (v.empty()) throw InvalidArgument("product with the empty word");
  const auto nfa = remove_empty_transitions(nfa_in);
  std::map<const NfaTransition*, PositionGraph> graphs;
  for (const auto& t : nfa.transitions) graphs.emplace(&t, PositionGraph(t.word, v));

  SuccinctNFA out;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> id;
  std::vector<std::pair<std::size_t, std::size_t>> work;
  auto get = [&](std::size_t q, std::size_t i) {
    auto [it, fresh] = id.emplace(std::make_pair(q, i), out.num_states());
    if (fresh) {
      out.add_state(nfa.states[q] + "@" + std::to_string(i));
      work.emplace_back(q, i);
      if (i == 0 && nfa.finals.count(q)) out.finals.insert(it->second);
    }
    return it->second;
  };
  out.initial = get(nfa.initial, 0);
  while (!work.empty()) {
    auto [q, i] = work.back();
    work.pop_back();
    const std::size_t from = id.at({q, i});
    for (const auto& t : nfa.transitions) {
      if (t.from != q) continue;
      auto end = graphs.at(&t).follow(i, t.exponent);
      if (!end) continue;
      const std::size_t to = get(t.to, *end);
      out.transitions.push_back({from, t.word, t.exponent, to});
    }
  }
  return out;
}

namespace detail {

// Collapses all final states into one sink so walk-length questions have a single target.
inline WeightedGraph weighted_with_sink(const SuccinctNFA& a, std::size_t& sink) {
  WeightedGraph g;
  g.num_vertices = a.num_states() + 1;
  sink = a.num_states();
  for (const auto& t : a.transitions) {
    const u64 len = t.length();
    if (len == 0) throw InvalidArgument("empty transition left after normalization");
    g.edges.push_back({t.from, t.to, len});
    if (a.finals.count(t.to)) g.edges.push_back({t.from, sink, len});
  }
  return g;
}

}  // namespace detail

/// Whether some accepting run reads a word of exactly `target` letters.
inline bool length_reach(const SuccinctNFA& nfa_in, u64 target, const Caps& caps = {}) {
  const auto nfa = remove_empty_transitions(nfa_in);
  if (target == 0) return nfa.finals.count(nfa.initial) > 0;
  std::size_t sink = 0;
  const auto g = detail::weighted_with_sink(nfa, sink);
  return exact_walk(g, nfa.initial, sink, target, caps);
}

/// v^m in L(nfa).
inline bool membership(const SuccinctNFA& nfa, const Word& v, u64 m, const Caps& caps = {}) {
  if (m == 0 || v.empty()) return remove_empty_transitions(nfa).finals.count(nfa.initial) > 0;
  const auto product = build_product(nfa, v);
  return length_reach(product, mul_checked(m, v.size()), caps);
}

/// Least m with v^m in L(nfa), or kInfinity.
inline u64 min_power_accepted(const SuccinctNFA& nfa, const Word& v) {
  if (remove_empty_transitions(nfa).finals.count(nfa.initial)) return 0;
  if (v.empty()) return kInfinity;
  const auto product = build_product(nfa, v);
  std::size_t sink = 0;
  const auto g = detail::weighted_with_sink(product, sink);
  const u64 len = min_walk_length(g, product.initial, sink);
  return len == kInfinity ? kInfinity : len / v.size();
}

/// The atoms of a succinct CQ read as transitions between its variables.
inline SuccinctNFA from_succinct_cq_path(const SuccinctCQ& l, const std::string& src, const std::string& dst) {
  if (!l.has_variable(src)) throw InvalidArgument("unknown variable ?" + src);
  if (!l.has_variable(dst)) throw InvalidArgument("unknown variable ?" + dst);
  SuccinctNFA out;
  std::map<std::string, std::size_t> id;
  for (const auto& v : l.variables) id[v] = out.add_state(v);
  for (const auto& a : l.atoms) out.add_transition(id.at(a.source), a.word, a.exponent, id.at(a.target));
  out.initial = id.at(src);
  out.finals.insert(id.at(dst));
  return out;
}

// ---------------------------------------------------------------------------
// Text format:
//   initial: p
//   finals: q r
//   p -[(ab)^13]-> q

inline std::string render(const SuccinctNFA& a) {
  std::ostringstream out;
  out << "initial: " << a.states.at(a.initial) << "\n";
  out << "finals:";
  for (auto f : a.finals) out << " " << a.states.at(f);
  out << "\n";
  for (const auto& t : a.transitions) {
    out << a.states[t.from] << " -[";
    if (t.word.empty())
      out << "eps";
    else
      out << detail::render_word_base(t.word) << "^" << t.exponent;
    out << "]-> " << a.states[t.to] << "\n";
  }
  return out.str();
}

inline SuccinctNFA parse_succinct_nfa(std::string_view text) {
  SuccinctNFA out;
  std::map<std::string, std::size_t> id;
  auto state = [&](const std::string& name) {
    auto it = id.find(name);
    if (it != id.end()) return it->second;
    return id[name] = out.add_state(name);
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  std::optional<std::string> initial;
  std::vector<std::string> finals;
  bool saw_finals = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.rfind("initial:", 0) == 0) {
      initial = trim(line.substr(8));
      if (initial->empty()) throw ParseError("missing initial state", line_no, 1);
      continue;
    }
    if (line.rfind("finals:", 0) == 0) {
      saw_finals = true;
      std::istringstream names(line.substr(7));
      std::string name;
      while (names >> name) {
        if (!name.empty() && name.back() == ',') name.pop_back();
        if (!name.empty()) finals.push_back(name);
      }
      continue;
    }
    const auto open = line.find("-[");
    const auto close = line.rfind("]->");
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw ParseError("expected 'p -[label]-> q'", line_no, 1);
    const auto from = trim(line.substr(0, open));
    const auto to = trim(line.substr(close + 3));
    if (from.empty() || to.empty()) throw ParseError("missing state name", line_no, 1);
    RegexExpr label;
    try {
      label = parse_regex(line.substr(open + 2, close - open - 2));
    } catch (const ParseError& e) {
      throw ParseError(std::string("bad transition label: ") + e.what(), line_no, open + 3);
    }
    if (label.kind == RegexExpr::Kind::Power) {
      out.add_transition(state(from), label.word, label.exponent, state(to));
    } else if (auto w = as_literal_word(label)) {
      out.add_transition(state(from), *w, w->empty() ? 0 : 1, state(to));
    } else {
      throw ParseError("transition labels must be w^n or a literal word", line_no, open + 3);
    }
  }
  if (!initial) throw ParseError("missing 'initial:' header", line_no + 1, 1);
  if (!saw_finals) throw ParseError("missing 'finals:' header", line_no + 1, 1);
  out.initial = state(*initial);
  for (const auto& f : finals) out.finals.insert(state(f));
  return out;
}

}  // namespace crpq
