#pragma once

// Brute-force ground truth: everything here materializes powers explicitly and is
// meant for small instances only.

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "crpq/common.hpp"
#include "crpq/expansion.hpp"
#include "crpq/homomorphism.hpp"
#include "crpq/qbfgen.hpp"
#include "crpq/succinct_nfa.hpp"
#include "crpq/syntax.hpp"

namespace crpq {

// ---------------------------------------------------------------------------
// Automata

/// v^m in L(nfa), by unrolling every transition into single letters and simulating.
inline bool nfa_membership_brute(const SuccinctNFA& nfa, const Word& v, u64 m, u64 cap = Caps{}.materialized_atoms) {
  // Letter transitions and epsilon moves over an explicit state space.
  std::size_t states = nfa.num_states();
  std::vector<std::tuple<std::size_t, Symbol, std::size_t>> letters;
  std::vector<std::pair<std::size_t, std::size_t>> eps;
  u64 total = 0;
  for (const auto& t : nfa.transitions) {
    const u64 len = mul_checked(t.word.size(), t.exponent);
    total = add_checked(total, len);
    if (total > cap) throw CapExceeded("materialized automaton");
    if (len == 0) {
      eps.emplace_back(t.from, t.to);
      continue;
    }
    std::size_t prev = t.from;
    u64 k = 0;
    for (u64 rep = 0; rep < t.exponent; ++rep)
      for (const auto& s : t.word) {
        const std::size_t next = ++k == len ? t.to : states++;
        letters.emplace_back(prev, s, next);
        prev = next;
      }
  }
  const u64 word_len = mul_checked(v.size(), m);
  if (word_len > cap) throw CapExceeded("materialized word");
  auto close = [&](std::vector<bool>& cur) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto [a, b] : eps)
        if (cur[a] && !cur[b]) cur[b] = changed = true;
    }
  };
  std::vector<bool> cur(states, false);
  cur[nfa.initial] = true;
  close(cur);
  for (u64 i = 0; i < word_len; ++i) {
    const auto& sym = v[i % v.size()];
    std::vector<bool> next(states, false);
    bool any = false;
    for (const auto& [a, s, b] : letters)
      if (cur[a] && s == sym) next[b] = any = true;
    if (!any) return false;
    close(next);
    cur = std::move(next);
  }
  for (auto f : nfa.finals)
    if (cur[f]) return true;
  return false;
}

/// left contained in right, decided on the materialized CQs.
inline bool materialized_containment(const SuccinctCQ& left, const SuccinctCQ& right,
                                     u64 cap = Caps{}.materialized_atoms) {
  return cq_hom(materialize(right, cap), materialize(left, cap)).has_value();
}

/// Whether some expansion of `q` (all star-free or with stars bounded by `star_cap`)
/// maps into lambda, by enumerating materialized right-hand expansions.
inline bool materialized_expansion_contained(const SuccinctCQ& lambda, const UCRPQ& q, u64 star_cap,
                                             u64 cap = Caps{}.materialized_atoms) {
  const CQ target = materialize(lambda, cap);
  const auto bounded = bound_query(q, star_cap);
  for (const auto& d : bounded.disjuncts) {
    bool found = false;
    for_each_expansion(d, {}, cap, [&](const SuccinctCQ& e) {
      found = cq_hom(materialize(e, cap), target).has_value();
      return !found;
    });
    if (found) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Graph databases

struct GraphDB {
  std::set<std::string> vertices;
  std::set<std::tuple<std::string, Symbol, std::string>> edges;

  void add_edge(const std::string& u, const Symbol& a, const std::string& v) {
    vertices.insert(u);
    vertices.insert(v);
    edges.insert({u, a, v});
  }
  bool operator==(const GraphDB&) const = default;
};

/// CSV lines `src,label,dst`; a first line `src,label,dst` is treated as a header.
inline GraphDB parse_graph_csv(std::string_view text) {
  GraphDB g;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() == 1 && !g.vertices.count(cells[0])) {
      g.vertices.insert(cells[0]);  // isolated vertex
      continue;
    }
    if (cells.size() != 3) throw ParseError("expected src,label,dst", line_no, 1);
    if (line_no == 1 && cells[0] == "src" && cells[1] == "label" && cells[2] == "dst") continue;
    g.add_edge(cells[0], cells[1], cells[2]);
  }
  return g;
}

inline std::string render_csv(const GraphDB& g) {
  std::string out = "src,label,dst\n";
  std::set<std::string> touched;
  for (const auto& [u, a, v] : g.edges) {
    out += u + "," + a + "," + v + "\n";
    touched.insert(u);
    touched.insert(v);
  }
  for (const auto& v : g.vertices)
    if (!touched.count(v)) out += v + "\n";
  return out;
}

/// The canonical database of a CQ: its atoms read as edges.
inline GraphDB graph_of(const CQ& q) {
  GraphDB g;
  for (const auto& v : q.variables) g.vertices.insert(v);
  for (const auto& a : q.atoms) g.add_edge(a.source, a.symbol, a.target);
  return g;
}

namespace detail {

// Small epsilon-NFA for one expression of the supported fragment.
struct RegexAutomaton {
  std::size_t states = 0;
  std::vector<std::tuple<std::size_t, Symbol, std::size_t>> letters;
  std::vector<std::pair<std::size_t, std::size_t>> eps;
  std::size_t start = 0, accept = 0;

  std::size_t fresh() { return states++; }

  // Adds a fragment between s and t.
  void build(const RegexExpr& e, std::size_t s, std::size_t t, u64& budget) {
    using K = RegexExpr::Kind;
    auto spend = [&](u64 n) {
      if (n > budget) throw CapExceeded("regex automaton");
      budget -= n;
    };
    auto chain = [&](const Word& w, u64 reps, std::size_t from, std::size_t to) {
      spend(mul_sat(w.size(), reps));
      std::size_t prev = from;
      if (reps == 0) {
        eps.emplace_back(from, to);
        return;
      }
      const u64 len = w.size() * reps;
      u64 k = 0;
      for (u64 r = 0; r < reps; ++r)
        for (const auto& sym : w) {
          const std::size_t next = ++k == len ? to : fresh();
          letters.emplace_back(prev, sym, next);
          prev = next;
        }
    };
    switch (e.kind) {
      case K::Epsilon: eps.emplace_back(s, t); break;
      case K::Letter: letters.emplace_back(s, e.symbol, t); break;
      case K::Concat: {
        std::size_t prev = s;
        for (std::size_t i = 0; i < e.children.size(); ++i) {
          const std::size_t next = i + 1 == e.children.size() ? t : fresh();
          build(e.children[i], prev, next, budget);
          prev = next;
        }
        break;
      }
      case K::Union:
        for (const auto& c : e.children) build(c, s, t, budget);
        break;
      case K::Power: chain(e.word, e.exponent, s, t); break;
      case K::PowerLE: {
        spend(mul_sat(e.word.size(), e.exponent));
        std::size_t prev = s;
        eps.emplace_back(s, t);
        for (u64 r = 0; r < e.exponent; ++r) {
          const std::size_t next = fresh();
          chain(e.word, 1, prev, next);
          eps.emplace_back(next, t);
          prev = next;
        }
        break;
      }
      case K::Star: {
        // |w|-state cycle through a hub.
        const std::size_t hub = fresh();
        eps.emplace_back(s, hub);
        eps.emplace_back(hub, t);
        chain(e.word, 1, hub, hub);
        break;
      }
    }
  }

  static RegexAutomaton of(const RegexExpr& e, u64 budget = Caps{}.materialized_atoms) {
    RegexAutomaton a;
    a.start = a.fresh();
    a.accept = a.fresh();
    a.build(e, a.start, a.accept, budget);
    return a;
  }
};

// Pairs (u, v) of graph vertices joined by a path whose label is in L(e).
inline std::set<std::pair<std::size_t, std::size_t>> relation(const RegexExpr& e, const GraphDB& g,
                                                              const std::vector<std::string>& names,
                                                              const std::map<std::string, std::size_t>& id) {
  const auto a = RegexAutomaton::of(e);
  std::map<std::pair<std::size_t, Symbol>, std::vector<std::size_t>> gsucc;
  for (const auto& [u, s, v] : g.edges) gsucc[{id.at(u), s}].push_back(id.at(v));
  std::vector<std::vector<std::pair<Symbol, std::size_t>>> aletters(a.states);
  std::vector<std::vector<std::size_t>> aeps(a.states);
  for (const auto& [p, s, q] : a.letters) aletters[p].push_back({s, q});
  for (const auto& [p, q] : a.eps) aeps[p].push_back(q);
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t start = 0; start < names.size(); ++start) {
    std::set<std::pair<std::size_t, std::size_t>> seen{{start, a.start}};
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, a.start}};
    while (!stack.empty()) {
      auto [v, st] = stack.back();
      stack.pop_back();
      if (st == a.accept) out.insert({start, v});
      for (auto q : aeps[st])
        if (seen.insert({v, q}).second) stack.push_back({v, q});
      for (const auto& [sym, q] : aletters[st]) {
        auto it = gsucc.find({v, sym});
        if (it == gsucc.end()) continue;
        for (auto w : it->second)
          if (seen.insert({w, q}).second) stack.push_back({w, q});
      }
    }
  }
  return out;
}

}  // namespace detail

/// G satisfies the Boolean query q.
inline bool eval_on_graph(const UCRPQ& q, const GraphDB& g) {
  std::vector<std::string> names(g.vertices.begin(), g.vertices.end());
  std::map<std::string, std::size_t> id;
  for (std::size_t i = 0; i < names.size(); ++i) id[names[i]] = i;
  for (const auto& raw : q.disjuncts) {
    const CRPQ d = collapse(raw);
    const auto vars = variables(d);
    if (vars.empty()) return true;
    if (names.empty()) continue;
    std::map<std::string, std::size_t> vid;
    for (std::size_t i = 0; i < vars.size(); ++i) vid[vars[i]] = i;
    std::vector<std::set<std::pair<std::size_t, std::size_t>>> rel;
    for (const auto& a : d.atoms) rel.push_back(detail::relation(a.label, g, names, id));
    std::vector<long> image(vars.size(), -1);
    std::function<bool(std::size_t)> assign = [&](std::size_t i) -> bool {
      if (i == vars.size()) return true;
      for (std::size_t c = 0; c < names.size(); ++c) {
        image[i] = static_cast<long>(c);
        bool ok = true;
        for (std::size_t k = 0; k < d.atoms.size() && ok; ++k) {
          const auto s = vid.at(d.atoms[k].source), t = vid.at(d.atoms[k].target);
          if (image[s] < 0 || image[t] < 0 || (s != i && t != i)) continue;
          ok = rel[k].count({static_cast<std::size_t>(image[s]), static_cast<std::size_t>(image[t])}) > 0;
        }
        if (ok && assign(i + 1)) return true;
      }
      image[i] = -1;
      return false;
    };
    if (assign(0)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Randomized equivalence

struct Verdict {
  enum class Kind { Agree, Disagree, Skipped };
  Kind kind = Kind::Agree;
  u64 random_trials = 0;
  u64 expansion_graphs = 0;
  std::optional<GraphDB> instance;  // Disagree: a graph on which exactly one query holds
  u64 instance_index = 0;
  std::string note;
};

inline GraphDB random_graph(const std::vector<Symbol>& sigma, std::size_t n, std::mt19937_64& rng) {
  GraphDB g;
  for (std::size_t v = 0; v < n; ++v) g.vertices.insert("v" + std::to_string(v));
  if (sigma.empty() || n == 0) return g;
  // Expected out-degree two, spread over all labels.
  const double p = std::min(1.0, 2.0 / static_cast<double>(n * sigma.size()));
  std::bernoulli_distribution coin(p);
  for (std::size_t u = 0; u < n; ++u)
    for (const auto& a : sigma)
      for (std::size_t v = 0; v < n; ++v)
        if (coin(rng)) g.add_edge("v" + std::to_string(u), a, "v" + std::to_string(v));
  return g;
}

/// Compares q and q2 on `trials` random graphs and on the canonical databases of
/// their expansions (stars unrolled up to `star_cap`, at most `expansion_cap` each).
inline Verdict sampled_equivalence(const UCRPQ& q, const UCRPQ& q2, u64 trials, std::size_t graph_size, u64 seed,
                                   u64 star_cap = 4, u64 expansion_cap = 2000) {
  Verdict verdict;
  std::set<Symbol> sigma_set = alphabet(q);
  for (const auto& s : alphabet(q2)) sigma_set.insert(s);
  const std::vector<Symbol> sigma(sigma_set.begin(), sigma_set.end());
  u64 index = 0;
  auto check = [&](const GraphDB& g) {
    ++index;
    if (eval_on_graph(q, g) != eval_on_graph(q2, g)) {
      verdict.kind = Verdict::Kind::Disagree;
      verdict.instance = g;
      verdict.instance_index = index;
      return false;
    }
    return true;
  };
  for (const auto* query : {&q, &q2}) {
    const auto bounded = bound_query(*query, star_cap);
    for (const auto& d : bounded.disjuncts) {
      try {
        bool go = true;
        for_each_expansion(d, {}, expansion_cap, [&](const SuccinctCQ& e) {
          ++verdict.expansion_graphs;
          go = check(graph_of(materialize(e)));
          return go;
        });
        if (!go) return verdict;
      } catch (const CapExceeded&) {
        verdict.note = "expansion graphs truncated";
      }
    }
  }
  std::mt19937_64 rng(seed);
  for (u64 t = 0; t < trials; ++t) {
    ++verdict.random_trials;
    if (!check(random_graph(sigma, graph_size, rng))) return verdict;
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// QBF

/// Truth of the forall-exists formula by enumerating all assignments.
inline bool qbf_satisfiable(const QBF& phi) {
  phi.validate();
  if (phi.n + phi.l > 20) throw InvalidArgument("brute-force QBF limited to 20 variables");
  auto holds = [&](std::uint32_t bits) {
    for (const auto& c : phi.clauses) {
      bool sat = false;
      for (int lit : c) {
        const bool value = (bits >> (std::abs(lit) - 1)) & 1u;
        sat = sat || (lit > 0 ? value : !value);
      }
      if (!sat) return false;
    }
    return true;
  };
  for (std::uint32_t x = 0; x < (1u << phi.n); ++x) {
    bool found = false;
    for (std::uint32_t y = 0; y < (1u << phi.l) && !found; ++y) found = holds(x | (y << phi.n));
    if (!found) return false;
  }
  return true;
}

}  // namespace crpq
