#pragma once

// Homomorphisms between conjunctive queries and containment between succinct CQs.
//
// `cq_hom` is a plain backtracking search over materialized CQs. The succinct
// search never unrolls powers: a right-hand pattern is embedded into the left
// succinct CQ by mapping its variables to points (variables of the left query or
// positions inside one of its w^n atoms) and checking each pattern atom with the
// succinct-NFA machinery on the left query broken at those points.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "crpq/common.hpp"
#include "crpq/expansion.hpp"
#include "crpq/succinct_nfa.hpp"
#include "crpq/syntax.hpp"

namespace crpq {

using Hom = std::map<std::string, std::string>;

// ---------------------------------------------------------------------------
// Plain CQ homomorphisms

/// Some homomorphism from `src` to `dst`, if one exists.
inline std::optional<Hom> cq_hom(const CQ& src, const CQ& dst) {
  std::map<std::string, std::size_t> sid, did;
  std::vector<std::string> svars, dvars;
  auto intern = [](std::map<std::string, std::size_t>& ids, std::vector<std::string>& names, const std::string& v) {
    auto [it, fresh] = ids.emplace(v, names.size());
    if (fresh) names.push_back(v);
    return it->second;
  };
  for (const auto& v : src.variables) intern(sid, svars, v);
  for (const auto& a : src.atoms) {
    intern(sid, svars, a.source);
    intern(sid, svars, a.target);
  }
  for (const auto& v : dst.variables) intern(did, dvars, v);
  for (const auto& a : dst.atoms) {
    intern(did, dvars, a.source);
    intern(did, dvars, a.target);
  }
  if (svars.empty()) return Hom{};
  if (dvars.empty()) return std::nullopt;

  // dst adjacency: (vertex, symbol) -> successors / predecessors.
  std::map<std::pair<std::size_t, Symbol>, std::set<std::size_t>> succ, pred;
  std::set<std::tuple<std::size_t, Symbol, std::size_t>> edges;
  for (const auto& a : dst.atoms) {
    const auto s = did.at(a.source), t = did.at(a.target);
    succ[{s, a.symbol}].insert(t);
    pred[{t, a.symbol}].insert(s);
    edges.insert({s, a.symbol, t});
  }
  struct Edge {
    std::size_t other;
    Symbol symbol;
    bool outgoing;
  };
  const std::size_t n = svars.size();
  std::vector<std::vector<Edge>> adj(n);
  for (const auto& a : src.atoms) {
    const auto s = sid.at(a.source), t = sid.at(a.target);
    adj[s].push_back({t, a.symbol, true});
    if (s != t) adj[t].push_back({s, a.symbol, false});
  }
  static const std::set<std::size_t> kNone;
  auto lookup = [&](const auto& index, std::size_t v, const Symbol& sym) -> const std::set<std::size_t>& {
    auto it = index.find({v, sym});
    return it == index.end() ? kNone : it->second;
  };

  std::vector<long> image(n, -1);
  auto consistent = [&](std::size_t v, std::size_t d) {
    for (const auto& e : adj[v]) {
      const std::size_t o = e.other == v ? d : static_cast<std::size_t>(image[e.other]);
      if (e.other != v && image[e.other] < 0) continue;
      if (e.outgoing ? !edges.count({d, e.symbol, o}) : !edges.count({o, e.symbol, d})) return false;
    }
    return true;
  };
  std::function<bool(std::size_t)> solve = [&](std::size_t assigned) -> bool {
    if (assigned == n) return true;
    // Most constrained unassigned variable: fewest candidates from assigned neighbours.
    std::size_t best = n;
    std::vector<std::size_t> best_cands;
    bool best_bound = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (image[v] >= 0) continue;
      std::optional<std::set<std::size_t>> cands;
      for (const auto& e : adj[v]) {
        if (e.other == v || image[e.other] < 0) continue;
        const auto& s = e.outgoing ? lookup(pred, static_cast<std::size_t>(image[e.other]), e.symbol)
                                   : lookup(succ, static_cast<std::size_t>(image[e.other]), e.symbol);
        if (!cands) {
          cands = s;
        } else {
          std::set<std::size_t> keep;
          std::set_intersection(cands->begin(), cands->end(), s.begin(), s.end(), std::inserter(keep, keep.end()));
          cands = std::move(keep);
        }
      }
      if (!cands) {
        if (best == n && !best_bound) best = v;
        continue;
      }
      if (!best_bound || cands->size() < best_cands.size()) {
        best = v;
        best_bound = true;
        best_cands.assign(cands->begin(), cands->end());
      }
    }
    if (!best_bound) {
      best_cands.resize(dvars.size());
      for (std::size_t d = 0; d < dvars.size(); ++d) best_cands[d] = d;
    }
    for (auto d : best_cands) {
      if (!consistent(best, d)) continue;
      image[best] = static_cast<long>(d);
      if (solve(assigned + 1)) return true;
      image[best] = -1;
    }
    return false;
  };
  if (!solve(0)) return std::nullopt;
  Hom h;
  for (std::size_t v = 0; v < n; ++v) h[svars[v]] = dvars[static_cast<std::size_t>(image[v])];
  return h;
}

/// Checks that `h` maps every atom of `src` onto an atom of `dst`.
inline bool is_homomorphism(const Hom& h, const CQ& src, const CQ& dst) {
  std::set<CQAtom> target(dst.atoms.begin(), dst.atoms.end());
  for (const auto& a : src.atoms) {
    auto s = h.find(a.source), t = h.find(a.target);
    if (s == h.end() || t == h.end()) return false;
    if (!target.count({s->second, a.symbol, t->second})) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Points of a succinct CQ

/// A variable of the succinct CQ (atom == kVertex, offset = variable index) or the
/// position `offset` (1 <= offset < |w|*n) inside atom `atom`.
struct Point {
  static constexpr std::size_t kVertex = static_cast<std::size_t>(-1);
  std::size_t atom = kVertex;
  u64 offset = 0;

  bool is_vertex() const { return atom == kVertex; }
  auto operator<=>(const Point&) const = default;
};

/// A removed interior position: no pattern variable or path may use it.
struct Hole {
  std::size_t atom = 0;
  u64 offset = 0;
  auto operator<=>(const Hole&) const = default;
};

/// Right-hand pattern atom x -[u^k]-> y with lo <= k <= hi (hi may be kInfinity).
struct PatternAtom {
  std::string source;
  Word word;
  u64 lo = 1;
  u64 hi = 1;
  std::string target;
  auto operator<=>(const PatternAtom&) const = default;
};

struct Pattern {
  std::vector<std::string> variables;
  std::vector<PatternAtom> atoms;
};

/// For every atom of the left succinct CQ, the positions where a homomorphism image
/// breaks it into consecutive pieces.
struct AtomBreaking {
  std::vector<std::vector<u64>> cuts;
};

struct Embedding {
  std::map<std::string, Point> image;  // pattern variable -> point
  std::vector<u64> powers;             // chosen k per pattern atom
};

struct SearchContext {
  Caps caps;
  Stats* stats = nullptr;
  const Deadline* deadline = nullptr;
};

namespace detail {

// The left succinct CQ in one reading direction; the backward view reverses every
// atom (offsets o become L - o) so reading is always forward.
struct LeftView {
  struct A {
    std::size_t source = 0, target = 0;
    Word word;
    u64 exponent = 0;
    u64 length = 0;
    std::vector<u64> holes;  // sorted interior offsets
  };
  std::vector<std::string> names;
  std::vector<A> atoms;
  std::vector<std::vector<std::size_t>> out;

  LeftView(const SuccinctCQ& l, const std::vector<Hole>& holes, bool reversed) {
    std::map<std::string, std::size_t> id;
    for (const auto& v : l.variables) {
      id[v] = names.size();
      names.push_back(v);
    }
    out.resize(names.size());
    for (std::size_t j = 0; j < l.atoms.size(); ++j) {
      const auto& a = l.atoms[j];
      A b;
      b.source = id.at(reversed ? a.target : a.source);
      b.target = id.at(reversed ? a.source : a.target);
      b.word = a.word;
      if (reversed) std::reverse(b.word.begin(), b.word.end());
      b.exponent = a.exponent;
      b.length = mul_checked(a.word.size(), a.exponent);
      for (const auto& h : holes)
        if (h.atom == j) b.holes.push_back(reversed ? b.length - h.offset : h.offset);
      std::sort(b.holes.begin(), b.holes.end());
      out[b.source].push_back(j);
      atoms.push_back(std::move(b));
    }
  }

  // First hole strictly after `offset` in atom j, or the atom length when none.
  u64 next_barrier(std::size_t j, u64 offset) const {
    const auto& h = atoms[j].holes;
    auto it = std::upper_bound(h.begin(), h.end(), offset);
    return it == h.end() ? atoms[j].length : *it;
  }
  bool is_hole(std::size_t j, u64 offset) const {
    return std::binary_search(atoms[j].holes.begin(), atoms[j].holes.end(), offset);
  }
};

// Common prefix length of u^omega from phase a and w^omega from phase b; kInfinity
// when they agree forever (two periodic words agreeing on |u|+|w| letters are equal).
inline u64 periodic_lcp(const Word& u, std::size_t a, const Word& w, std::size_t b) {
  const std::size_t limit = u.size() + w.size();
  for (std::size_t i = 0; i < limit; ++i)
    if (u[(a + i) % u.size()] != w[(b + i) % w.size()]) return i;
  return kInfinity;
}

}  // namespace detail

/// Embeds right-hand patterns into one left succinct CQ (optionally with holes).
class Embedder {
 public:
  Embedder(const SuccinctCQ& left, std::vector<Hole> holes, SearchContext ctx)
      : left_(left), holes_(std::move(holes)), ctx_(ctx), fwd_(left, holes_, false), bwd_(left, holes_, true) {
    for (std::size_t v = 0; v < left_.variables.size(); ++v) vertex_id_[left_.variables[v]] = v;
  }

  const SuccinctCQ& left() const { return left_; }

  /// A homomorphism from (some expansion of) the pattern into the left query, if any.
  std::optional<Embedding> embed(const Pattern& p) {
    steps_ = 0;
    pattern_ = &p;
    const std::size_t n = p.variables.size();
    var_id_.clear();
    for (std::size_t i = 0; i < n; ++i) var_id_[p.variables[i]] = i;
    adj_.assign(n, {});
    for (std::size_t a = 0; a < p.atoms.size(); ++a) {
      const auto& pa = p.atoms[a];
      if (pa.word.empty() || pa.lo > pa.hi || (pa.lo > 0 && pa.lo < pa.hi))
        throw InvalidArgument("pattern atoms must be u^k (exact) or u^{<=k}");
      adj_[var_id_.at(pa.source)].push_back(a);
      if (pa.source != pa.target) adj_[var_id_.at(pa.target)].push_back(a);
    }
    image_.assign(n, std::nullopt);
    powers_.assign(p.atoms.size(), 0);
    if (n > 0 && left_.variables.empty()) return std::nullopt;

    // Components are independent.
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (comp[s] >= 0) continue;
      std::vector<std::size_t> stack{s};
      comp[s] = ncomp;
      while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto a : adj_[v])
          for (const auto& end : {p.atoms[a].source, p.atoms[a].target}) {
            auto w = var_id_.at(end);
            if (comp[w] < 0) {
              comp[w] = ncomp;
              stack.push_back(w);
            }
          }
      }
      ++ncomp;
    }
    for (int c = 0; c < ncomp; ++c) {
      std::vector<std::size_t> members;
      for (std::size_t v = 0; v < n; ++v)
        if (comp[v] == c) members.push_back(v);
      if (!solve_component(members)) return std::nullopt;
    }
    Embedding e;
    for (std::size_t v = 0; v < n; ++v) e.image[p.variables[v]] = *image_[v];
    e.powers = powers_;
    return e;
  }

  /// Positions where the embedding breaks the atoms of the left query.
  AtomBreaking breaking(const Embedding& e) const {
    AtomBreaking b;
    b.cuts.resize(left_.atoms.size());
    for (const auto& [v, pt] : e.image)
      if (!pt.is_vertex()) b.cuts[pt.atom].push_back(pt.offset);
    for (auto& c : b.cuts) {
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
    }
    return b;
  }

  std::string point_name(const Point& p) const {
    if (p.is_vertex()) return left_.variables[p.offset];
    const auto& a = left_.atoms[p.atom];
    return a.source + "+" + std::to_string(p.offset) + ">" + a.target;
  }

 private:
  // Candidate images, kept as runs so long atoms are never enumerated up front. A run is
  // `count` points of one atom, `step` apart (descending offsets when `down`), the i-th
  // reached with power k + i * k_step of the generating atom; a vertex is a run of one.
  struct Run {
    Point first;
    u64 step = 0;
    u64 count = 1;
    bool down = false;
    u64 k = 0;
    u64 k_step = 0;
    Point at(u64 i) const {
      if (first.is_vertex()) return first;
      return Point{first.atom, down ? first.offset - i * step : first.offset + i * step};
    }
  };
  using Candidates = std::vector<Run>;

  void push(Candidates& out, const Run& r) const {
    if (r.count == 0) return;
    out.push_back(r);
    if (out.size() > ctx_.caps.candidates) throw CapExceeded("candidate points");
  }

  void tick() {
    if (++steps_ > ctx_.caps.search_steps) throw CapExceeded("embedding search steps");
    if (ctx_.stats) ++ctx_.stats->search_steps;
    if (ctx_.deadline && (steps_ & 63) == 0) ctx_.deadline->check();
  }

  // Letters a point must be able to emit / receive for exact pattern atoms.
  struct LetterNeeds {
    std::set<Symbol> out, in;
  };
  LetterNeeds needs(std::size_t v) const {
    LetterNeeds n;
    for (auto a : adj_[v]) {
      const auto& pa = pattern_->atoms[a];
      if (pa.lo == 0) continue;
      if (var_id_.at(pa.source) == v) n.out.insert(pa.word.front());
      if (var_id_.at(pa.target) == v) n.in.insert(pa.word.back());
    }
    return n;
  }

  // Interior offsets of atom j whose letters fit `need`, as residues modulo |w|.
  std::vector<std::size_t> fitting_residues(std::size_t j, const LetterNeeds& need) const {
    const auto& w = left_.atoms[j].word;
    std::vector<std::size_t> rs;
    if (need.out.size() > 1 || need.in.size() > 1) return rs;
    for (std::size_t r = 0; r < w.size(); ++r) {
      if (!need.out.empty() && w[r] != *need.out.begin()) continue;
      if (!need.in.empty() && w[(r + w.size() - 1) % w.size()] != *need.in.begin()) continue;
      rs.push_back(r);
    }
    return rs;
  }

  bool vertex_fits(std::size_t vtx, const LetterNeeds& need) const {
    for (const auto& s : need.out) {
      bool ok = false;
      for (auto j : fwd_.out[vtx]) ok = ok || fwd_.atoms[j].word.front() == s;
      if (!ok) return false;
    }
    for (const auto& s : need.in) {
      bool ok = false;
      for (auto j : bwd_.out[vtx]) ok = ok || bwd_.atoms[j].word.front() == s;
      if (!ok) return false;
    }
    return true;
  }

  u64 count_free_candidates(std::size_t v) const {
    const auto need = needs(v);
    u64 count = 0;
    for (std::size_t x = 0; x < left_.variables.size(); ++x) count += vertex_fits(x, need) ? 1 : 0;
    for (std::size_t j = 0; j < left_.atoms.size(); ++j) {
      const auto rs = fitting_residues(j, need);
      const u64 len = fwd_.atoms[j].length, wl = left_.atoms[j].word.size();
      count = add_sat(count, mul_sat(rs.size(), len / wl + 1));
    }
    return count;
  }

  Candidates free_candidates(std::size_t v) const {
    const auto need = needs(v);
    Candidates out;
    for (std::size_t x = 0; x < left_.variables.size(); ++x)
      if (vertex_fits(x, need)) push(out, Run{Point{Point::kVertex, x}});
    for (std::size_t j = 0; j < left_.atoms.size(); ++j) {
      const u64 len = fwd_.atoms[j].length, wl = left_.atoms[j].word.size();
      for (auto r : fitting_residues(j, need)) {
        const u64 first = r == 0 ? wl : r;
        if (first >= len) continue;
        push(out, Run{Point{j, first}, wl, (len - 1 - first) / wl + 1});
      }
    }
    return out;
  }

  static Point to_view(const detail::LeftView& view, const Point& p) {
    if (p.is_vertex()) return p;
    return Point{p.atom, view.atoms[p.atom].length - p.offset};
  }

  // Endpoints of reading u^k (lo <= k <= hi) forward in `view` from point p.
  Candidates read(const detail::LeftView& view, bool reversed, Point p, const Word& u, u64 lo, u64 hi) {
    Candidates out;
    const u64 U = u.size();
    if (!p.is_vertex() && reversed) p = to_view(view, p);
    auto emit = [&](Point q, u64 k) {
      if (!q.is_vertex() && reversed) q = to_view(view, q);
      push(out, Run{q, 0, 1, false, k, 0});
    };

    if (lo == hi) {
      const u64 total = mul_checked(lo, U);
      if (total == 0) {
        emit(p, 0);
        return out;
      }
      std::set<std::pair<std::size_t, u64>> seen;  // (vertex, remaining)
      std::set<Point> emitted;
      std::vector<std::pair<std::size_t, u64>> stack;
      auto along = [&](std::size_t j, u64 from, u64 remaining) {
        // Read `remaining` letters in atom j starting at offset `from`.
        tick();
        const auto& a = view.atoms[j];
        const u64 phase = (total - remaining) % U;
        const u64 m = detail::periodic_lcp(u, phase, a.word, from % a.word.size());
        const u64 barrier = view.next_barrier(j, from);
        const u64 room = a.length - from;
        if (remaining < room) {
          if (m >= remaining && from + remaining < barrier) {
            Point q{j, from + remaining};
            if (emitted.insert(q).second) emit(q, lo);
          }
          return;
        }
        if (m < room || barrier < a.length) return;
        if (remaining == room) {
          Point q{Point::kVertex, a.target};
          if (emitted.insert(q).second) emit(q, lo);
          return;
        }
        if (seen.insert({a.target, remaining - room}).second) stack.push_back({a.target, remaining - room});
      };
      if (p.is_vertex()) {
        seen.insert({p.offset, total});
        stack.push_back({p.offset, total});
      } else {
        along(p.atom, p.offset, total);
      }
      while (!stack.empty()) {
        auto [vtx, remaining] = stack.back();
        stack.pop_back();
        for (auto j : view.out[vtx]) along(j, 0, remaining);
      }
      return out;
    }

    // Range 0 <= k <= hi: least consumption per (vertex, phase), endpoints in the
    // order they are discovered.
    const u64 budget = mul_sat(hi, U);
    std::set<std::size_t> vertices_seen;
    auto offer_vertex = [&](std::size_t vtx, u64 consumed) {
      if (vertices_seen.insert(vtx).second) emit(Point{Point::kVertex, vtx}, consumed / U);
    };
    if (p.is_vertex()) {
      offer_vertex(p.offset, 0);
    } else {
      emit(p, 0);
    }
    using Item = std::tuple<u64, std::size_t, u64>;  // consumed, vertex, phase
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    std::map<std::pair<std::size_t, u64>, u64> dist;
    auto relax = [&](std::size_t vtx, u64 phase, u64 consumed) {
      if (consumed > budget) return;
      auto key = std::make_pair(vtx, phase);
      auto it = dist.find(key);
      if (it != dist.end() && it->second <= consumed) return;
      dist[key] = consumed;
      pq.push({consumed, vtx, phase});
    };
    auto along = [&](std::size_t j, u64 from, u64 phase, u64 consumed) {
      tick();
      const auto& a = view.atoms[j];
      const u64 m = detail::periodic_lcp(u, phase, a.word, from % a.word.size());
      const u64 barrier = view.next_barrier(j, from);
      // Interior endpoints from+l: 1 <= l <= m, before the barrier, within budget, phase back to 0.
      u64 reach = std::min<u64>(m, barrier - from - 1);
      if (budget != kInfinity) reach = std::min<u64>(reach, budget - consumed);
      u64 l = (U - phase % U) % U;
      if (l == 0) l = U;
      if (l <= reach) {
        Run r{Point{j, from + l}, U, (reach - l) / U + 1, false, (consumed + l) / U, 1};
        if (reversed) {
          r.first = to_view(view, r.first);
          r.down = true;
        }
        push(out, r);
      }
      const u64 room = a.length - from;
      if (barrier == a.length && m >= room) relax(a.target, (phase + room) % U, add_sat(consumed, room));
    };
    if (p.is_vertex()) {
      relax(p.offset, 0, 0);
    } else {
      along(p.atom, p.offset, 0, 0);
    }
    while (!pq.empty()) {
      auto [consumed, vtx, phase] = pq.top();
      pq.pop();
      if (dist[{vtx, phase}] != consumed) continue;
      if (phase == 0) offer_vertex(vtx, consumed);
      for (auto j : view.out[vtx]) along(j, 0, phase, consumed);
    }
    return out;
  }

  // ---- verification of one pattern atom between two fixed points

  std::optional<u64> verify(std::size_t atom, const Point& p, const Point& q) {
    const auto& pa = pattern_->atoms[atom];
    auto key = std::make_tuple(pa.word, pa.lo, pa.hi, p, q);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::optional<u64> result;
    if (ctx_.stats) ++ctx_.stats->nfa_calls;
    if (ctx_.deadline) ctx_.deadline->check();
    SuccinctNFA nfa;
    std::size_t from = 0, to = 0;
    broken_nfa(p, q, nfa, from, to);
    nfa.initial = from;
    nfa.finals = {to};
    if (pa.lo == pa.hi) {
      if (membership(nfa, pa.word, pa.lo, ctx_.caps)) result = pa.lo;
    } else {
      const u64 k = min_power_accepted(nfa, pa.word);
      if (k != kInfinity && k <= pa.hi) result = k;
    }
    memo_.emplace(key, result);
    return result;
  }

  // The left query as an automaton over its variables, with atoms cut at p and q
  // and at every hole (pieces touching a hole are dropped).
  void broken_nfa(const Point& p, const Point& q, SuccinctNFA& nfa, std::size_t& from, std::size_t& to) const {
    for (const auto& v : left_.variables) nfa.add_state(v);
    std::map<Point, std::size_t> cut_state;
    auto state_of = [&](const Point& pt) -> std::size_t {
      if (pt.is_vertex()) return pt.offset;
      auto it = cut_state.find(pt);
      if (it != cut_state.end()) return it->second;
      return cut_state[pt] = nfa.add_state(point_name(pt));
    };
    from = state_of(p);
    to = state_of(q);
    for (std::size_t j = 0; j < left_.atoms.size(); ++j) {
      const auto& a = fwd_.atoms[j];
      std::vector<std::pair<u64, bool>> marks;  // offset, is hole
      for (const auto* pt : {&p, &q})
        if (!pt->is_vertex() && pt->atom == j) marks.push_back({pt->offset, false});
      for (auto h : a.holes) marks.push_back({h, true});
      std::sort(marks.begin(), marks.end());
      marks.erase(std::unique(marks.begin(), marks.end(),
                              [](const auto& x, const auto& y) { return x.first == y.first; }),
                  marks.end());
      std::vector<std::pair<u64, bool>> bounds{{0, false}};
      bounds.insert(bounds.end(), marks.begin(), marks.end());
      bounds.push_back({a.length, false});
      for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        if (bounds[b].second || bounds[b + 1].second) continue;
        const u64 lo = bounds[b].first, hi = bounds[b + 1].first;
        const std::size_t s = lo == 0 ? a.source : state_of(Point{j, lo});
        const std::size_t t = hi == a.length ? a.target : state_of(Point{j, hi});
        add_factor(nfa, s, t, a.word, lo, hi);
      }
    }
  }

  // Transitions reading w^omega[lo, hi) from s to t.
  static void add_factor(SuccinctNFA& nfa, std::size_t s, std::size_t t, const Word& w, u64 lo, u64 hi) {
    const std::size_t r = static_cast<std::size_t>(lo % w.size());
    Word rot(w.begin() + static_cast<std::ptrdiff_t>(r), w.end());
    rot.insert(rot.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(r));
    const u64 len = hi - lo, reps = len / w.size();
    const std::size_t rem = static_cast<std::size_t>(len % w.size());
    Word tail(rot.begin(), rot.begin() + static_cast<std::ptrdiff_t>(rem));
    if (reps > 0 && rem > 0) {
      const auto mid = nfa.add_state(nfa.states[s] + "~" + std::to_string(nfa.num_states()));
      nfa.add_transition(s, rot, reps, mid);
      nfa.add_transition(mid, tail, 1, t);
    } else if (reps > 0) {
      nfa.add_transition(s, rot, reps, t);
    } else {
      nfa.add_transition(s, tail, 1, t);
    }
  }

  // ---- backtracking

  bool check_assigned(std::size_t v, std::size_t skip = static_cast<std::size_t>(-1)) {
    for (auto a : adj_[v]) {
      if (a == skip) continue;
      const auto& pa = pattern_->atoms[a];
      const auto s = var_id_.at(pa.source), t = var_id_.at(pa.target);
      if (!image_[s] || !image_[t]) continue;
      auto k = verify(a, *image_[s], *image_[t]);
      if (!k) return false;
      powers_[a] = *k;
    }
    return true;
  }

  bool solve_component(const std::vector<std::size_t>& members) {
    // Start from the variable with the fewest letter-compatible points.
    std::size_t start = members.front();
    u64 best = kInfinity;
    for (auto v : members) {
      const u64 c = count_free_candidates(v);
      if (c < best || (c == best && adj_[v].size() > adj_[start].size())) {
        best = c;
        start = v;
      }
    }
    if (best == 0) return false;
    std::size_t remaining = members.size();
    for (const auto& run : free_candidates(start))
      for (u64 i = 0; i < run.count; ++i) {
        const Point pt = run.at(i);
        if (!pt.is_vertex() && fwd_.is_hole(pt.atom, pt.offset)) continue;
        tick();
        image_[start] = pt;
        if (check_assigned(start) && extend(remaining - 1)) return true;
        image_[start] = std::nullopt;
      }
    return false;
  }

  bool extend(std::size_t remaining) {
    if (remaining == 0) return true;
    // Next variable: one reached by an assigned neighbour, preferring exact atoms.
    std::size_t best_atom = 0, best_var = 0;
    bool found = false;
    std::tuple<int, u64> best_key{3, kInfinity};
    for (std::size_t a = 0; a < pattern_->atoms.size(); ++a) {
      const auto& pa = pattern_->atoms[a];
      const auto s = var_id_.at(pa.source), t = var_id_.at(pa.target);
      const bool sa = image_[s].has_value(), ta = image_[t].has_value();
      if (sa == ta) continue;
      const std::tuple<int, u64> key{pa.lo == pa.hi ? 0 : 1, pa.hi};
      if (!found || key < best_key) {
        found = true;
        best_key = key;
        best_atom = a;
        best_var = sa ? t : s;
      }
    }
    if (!found) throw InvalidArgument("pattern component is not connected");
    const auto& pa = pattern_->atoms[best_atom];
    const bool forward = var_id_.at(pa.target) == best_var;
    const Point from = *image_[forward ? var_id_.at(pa.source) : var_id_.at(pa.target)];
    Word u = pa.word;
    if (!forward) std::reverse(u.begin(), u.end());
    const auto cands = read(forward ? fwd_ : bwd_, !forward, from, u, pa.lo, pa.hi);
    for (const auto& run : cands)
      for (u64 i = 0; i < run.count; ++i) {
        tick();
        image_[best_var] = run.at(i);
        powers_[best_atom] = run.k + i * run.k_step;
        if (check_assigned(best_var, best_atom) && extend(remaining - 1)) return true;
        image_[best_var] = std::nullopt;
      }
    return false;
  }

  const SuccinctCQ& left_;
  std::vector<Hole> holes_;
  SearchContext ctx_;
  detail::LeftView fwd_, bwd_;
  std::map<std::string, std::size_t> vertex_id_;

  const Pattern* pattern_ = nullptr;
  std::map<std::string, std::size_t> var_id_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::optional<Point>> image_;
  std::vector<u64> powers_;
  std::map<std::tuple<Word, u64, u64, Point, Point>, std::optional<u64>> memo_;
  u64 steps_ = 0;
};

// ---------------------------------------------------------------------------
// Patterns from queries

/// The pattern of a succinct CQ: every atom u^n is exact.
inline Pattern pattern_of(const SuccinctCQ& l) {
  Pattern p;
  p.variables = l.variables;
  for (const auto& a : l.atoms) p.atoms.push_back({a.source, a.word, a.exponent, a.exponent, a.target});
  return p;
}

/// The pattern of one union branch per atom of a collapsed star-free-or-star CRPQ:
/// multi-segment terms are split at fresh variables (adjacent plain words are joined
/// first), and u^{lo..hi} with 0 < lo < hi becomes u^lo followed by u^{<=hi-lo}.
inline Pattern pattern_of(const CRPQ& q, const std::vector<std::vector<Term>>& terms,
                          const std::vector<std::size_t>& choice) {
  detail::UnionFind uf;
  std::vector<PatternAtom> raw;
  std::set<std::string> vars;
  for (const auto& a : q.atoms) {
    vars.insert(a.source);
    vars.insert(a.target);
  }
  std::set<std::string> originals = vars;
  auto fresh = [&](std::size_t i, std::size_t s) {
    std::string name = "_r" + std::to_string(i) + "_" + std::to_string(s);
    while (originals.count(name)) name += "_";
    vars.insert(name);
    return name;
  };
  std::vector<std::pair<std::string, std::string>> merges;
  for (std::size_t i = 0; i < q.atoms.size(); ++i) {
    const auto& atom = q.atoms[i];
    const auto& term = terms[i][choice[i]];
    std::vector<Segment> segs;
    for (const auto& s : term) {
      if (s.hi == 0) continue;
      if (s.lo == 1 && s.hi == 1 && !segs.empty() && segs.back().lo == 1 && segs.back().hi == 1) {
        segs.back().word.insert(segs.back().word.end(), s.word.begin(), s.word.end());
      } else if (s.lo > 0 && s.lo < s.hi) {
        segs.push_back({s.word, s.lo, s.lo});
        segs.push_back({s.word, 0, s.hi == kInfinity ? kInfinity : s.hi - s.lo});
      } else {
        segs.push_back(s);
      }
    }
    if (segs.empty()) {
      merges.emplace_back(atom.source, atom.target);
      continue;
    }
    std::string prev = atom.source;
    for (std::size_t s = 0; s < segs.size(); ++s) {
      const std::string next = s + 1 == segs.size() ? atom.target : fresh(i, s + 1);
      raw.push_back({prev, segs[s].word, segs[s].lo, segs[s].hi, next});
      prev = next;
    }
  }
  for (const auto& [x, y] : merges) uf.unite(x, y);
  Pattern p;
  std::set<std::string> rep;
  for (const auto& v : vars) rep.insert(uf.find(v));
  p.variables.assign(rep.begin(), rep.end());
  std::set<PatternAtom> seen;
  for (auto a : raw) {
    a.source = uf.find(a.source);
    a.target = uf.find(a.target);
    if (seen.insert(a).second) p.atoms.push_back(a);
  }
  return p;
}

/// The right expansion realised by an embedding: pattern atoms with their chosen powers.
inline SuccinctCQ realised_expansion(const Pattern& p, const Embedding& e) {
  SuccinctCQ raw;
  raw.variables = p.variables;
  for (std::size_t a = 0; a < p.atoms.size(); ++a) {
    const auto& pa = p.atoms[a];
    raw.atoms.push_back({pa.source, pa.word, e.powers.at(a), pa.target});
  }
  return normalize(raw);
}

// ---------------------------------------------------------------------------
// Containment

/// left is contained in right: materialize(right) maps homomorphically into materialize(left).
inline bool succinct_containment(const SuccinctCQ& left, const SuccinctCQ& right, SearchContext ctx = {}) {
  Embedder emb(left, {}, ctx);
  return emb.embed(pattern_of(right)).has_value();
}

struct ContainmentWitness {
  bool contained = false;
  SuccinctCQ right_expansion;           // contained: the expansion of the right query used
  std::map<std::string, Point> hom;     // contained: its variables mapped to points of the left
  AtomBreaking breaking;                // contained: where the left atoms are cut
  std::string hom_text;                 // contained: readable form of the mapping
  SuccinctCQ counterexample;            // not contained: the left expansion itself
};

/// Whether the expansion `lambda` is contained in the star-free-or-star UCRPQ `q`
/// (some expansion of q maps into lambda). `holes` removes interior positions of lambda.
inline ContainmentWitness expansion_contained(const SuccinctCQ& lambda, const UCRPQ& q, SearchContext ctx = {},
                                              const std::vector<Hole>& holes = {}) {
  Embedder emb(lambda, holes, ctx);
  for (const auto& disjunct : q.disjuncts) {
    const CRPQ collapsed = collapse(disjunct);
    std::vector<std::vector<Term>> terms;
    for (const auto& a : collapsed.atoms) terms.push_back(normalize_terms(a.label, ctx.caps.branch_blowup));
    std::vector<std::size_t> choice(terms.size(), 0);
    u64 combos = 0;
    while (true) {
      if (++combos > ctx.caps.branch_blowup) throw CapExceeded("union branch combinations");
      const auto pattern = pattern_of(collapsed, terms, choice);
      if (auto e = emb.embed(pattern)) {
        ContainmentWitness w;
        w.contained = true;
        w.right_expansion = realised_expansion(pattern, *e);
        for (const auto& v : w.right_expansion.variables) {
          auto it = e->image.find(v);
          if (it != e->image.end()) w.hom[v] = it->second;
        }
        w.breaking = emb.breaking(*e);
        for (const auto& [v, pt] : w.hom) {
          if (!w.hom_text.empty()) w.hom_text += ", ";
          w.hom_text += "?" + v + " -> " + emb.point_name(pt);
        }
        return w;
      }
      bool advanced = false;
      for (std::size_t i = choice.size(); i-- > 0;) {
        if (++choice[i] < terms[i].size()) {
          advanced = true;
          break;
        }
        choice[i] = 0;
      }
      if (!advanced) break;
    }
  }
  ContainmentWitness w;
  w.counterexample = lambda;
  return w;
}

}  // namespace crpq
