#pragma once

// Exact walk-length questions on graphs with (possibly huge) positive edge weights.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <vector>

#include "crpq/common.hpp"

namespace crpq {

struct WeightedEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  u64 weight = 0;
};

struct WeightedGraph {
  std::size_t num_vertices = 0;
  std::vector<WeightedEdge> edges;
};

/// x in the additive monoid generated by `gens` (all positive).
inline bool in_numerical_semigroup(u64 x, std::vector<u64> gens, u64 step_cap = 1'000'000) {
  if (x == 0) return true;
  gens.erase(std::remove(gens.begin(), gens.end(), 0u), gens.end());
  if (gens.empty()) return false;
  u64 g = 0;
  for (u64 p : gens) g = std::gcd(g, p);
  if (x % g != 0) return false;
  x /= g;
  for (auto& p : gens) p /= g;
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  const u64 smallest = gens.front();
  if (smallest == 1) return true;
  if (smallest <= 200'000) {
    // Least representable value in every residue class modulo the smallest generator.
    std::vector<u64> best(smallest, kInfinity);
    best[0] = 0;
    using Item = std::pair<u64, u64>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0, 0});
    while (!pq.empty()) {
      auto [d, r] = pq.top();
      pq.pop();
      if (d != best[r]) continue;
      for (std::size_t i = 1; i < gens.size(); ++i) {
        const u64 nd = add_sat(d, gens[i]);
        const u64 nr = (r + gens[i] % smallest) % smallest;
        if (nd < best[nr]) {
          best[nr] = nd;
          pq.push({nd, nr});
        }
      }
    }
    return best[x % smallest] <= x;
  }
  // Large generators: enumerate coefficients of all but the smallest.
  u64 steps = 0;
  std::function<bool(u64, std::size_t)> rec = [&](u64 rest, std::size_t i) -> bool {
    if (++steps > step_cap) throw CapExceeded("numerical semigroup search");
    if (i == 0) return rest % gens[0] == 0;
    while (true) {
      if (rec(rest, i - 1)) return true;
      if (rest < gens[i]) return false;
      rest -= gens[i];
    }
  };
  return rec(x, gens.size() - 1);
}

/// Finite union of linear sets { base + k1*p1 + ... + kr*pr : ki >= 0 }.
class LengthSet {
 public:
  struct Linear {
    u64 base = 0;
    std::vector<u64> periods;  // sorted, distinct, positive
    bool operator<(const Linear& o) const { return std::tie(base, periods) < std::tie(o.base, o.periods); }
    bool operator==(const Linear& o) const = default;
  };

  LengthSet() = default;

  static LengthSet singleton(u64 x) {
    LengthSet s;
    s.add({x, {}});
    return s;
  }

  void add(Linear l) {
    std::sort(l.periods.begin(), l.periods.end());
    l.periods.erase(std::unique(l.periods.begin(), l.periods.end()), l.periods.end());
    l.periods.erase(std::remove(l.periods.begin(), l.periods.end(), 0u), l.periods.end());
    parts_.insert(std::move(l));
  }

  bool empty() const { return parts_.empty(); }
  const std::set<Linear>& parts() const { return parts_; }

  bool contains(u64 x) const {
    for (const auto& l : parts_)
      if (x >= l.base && in_numerical_semigroup(x - l.base, l.periods)) return true;
    return false;
  }

  u64 min_element() const {
    u64 best = kInfinity;
    for (const auto& l : parts_) best = std::min(best, l.base);
    return best;
  }

  /// Pointwise sum { x + y }.
  LengthSet operator+(const LengthSet& o) const {
    LengthSet out;
    for (const auto& a : parts_)
      for (const auto& b : o.parts_) {
        Linear l{add_sat(a.base, b.base), a.periods};
        l.periods.insert(l.periods.end(), b.periods.begin(), b.periods.end());
        out.add(std::move(l));
      }
    return out;
  }

  LengthSet& operator|=(const LengthSet& o) {
    parts_.insert(o.parts_.begin(), o.parts_.end());
    return *this;
  }

 private:
  std::set<Linear> parts_;
};

namespace detail {

// Vertices lying on some walk from s to t.
inline std::vector<bool> useful_vertices(const WeightedGraph& g, std::size_t s, std::size_t t) {
  std::vector<std::vector<std::size_t>> fwd(g.num_vertices), bwd(g.num_vertices);
  for (const auto& e : g.edges) {
    fwd[e.from].push_back(e.to);
    bwd[e.to].push_back(e.from);
  }
  auto sweep = [&](std::size_t start, const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<bool> seen(g.num_vertices, false);
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto w : adj[v])
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
    }
    return seen;
  };
  auto a = sweep(s, fwd), b = sweep(t, bwd);
  for (std::size_t v = 0; v < g.num_vertices; ++v) a[v] = a[v] && b[v];
  return a;
}

}  // namespace detail

/// Lengths of all walks from s to t: the union over simple paths P and sets C of
/// simple cycles connected to P of { w(P) + sum_C w(c) + sum_C k_c w(c) }.
inline LengthSet walk_lengths(const WeightedGraph& g, std::size_t s, std::size_t t, u64 combo_cap = Caps{}.cycle_sets) {
  LengthSet out;
  const auto useful = detail::useful_vertices(g, s, t);
  if (!useful[s]) return out;
  const std::size_t n = g.num_vertices;
  std::vector<std::vector<const WeightedEdge*>> adj(n);
  for (const auto& e : g.edges)
    if (useful[e.from] && useful[e.to]) adj[e.from].push_back(&e);

  // Simple cycles, each rooted at its least vertex.
  struct Cycle {
    u64 weight;
    std::vector<bool> on;
  };
  std::vector<Cycle> cycles;
  u64 budget = 0;
  {
    std::vector<bool> on_path(n, false);
    std::vector<std::size_t> path;
    std::function<void(std::size_t, std::size_t, u64)> dfs = [&](std::size_t root, std::size_t v, u64 w) {
      if (++budget > combo_cap * 4) throw CapExceeded("cycle enumeration");
      for (const auto* e : adj[v]) {
        if (e->to < root) continue;
        if (e->to == root) {
          Cycle c{add_sat(w, e->weight), std::vector<bool>(n, false)};
          for (auto x : path) c.on[x] = true;
          cycles.push_back(std::move(c));
          if (cycles.size() > 64) throw CapExceeded("cycle enumeration");
          continue;
        }
        if (on_path[e->to]) continue;
        on_path[e->to] = true;
        path.push_back(e->to);
        dfs(root, e->to, add_sat(w, e->weight));
        path.pop_back();
        on_path[e->to] = false;
      }
    };
    for (std::size_t r = 0; r < n; ++r) {
      if (!useful[r]) continue;
      on_path[r] = true;
      path = {r};
      dfs(r, r, 0);
      on_path[r] = false;
    }
  }

  // Simple paths s -> t.
  std::vector<std::pair<u64, std::vector<bool>>> paths;
  {
    std::vector<bool> on(n, false);
    std::function<void(std::size_t, u64)> dfs = [&](std::size_t v, u64 w) {
      if (++budget > combo_cap * 8) throw CapExceeded("path enumeration");
      if (v == t) {
        paths.emplace_back(w, on);
        if (paths.size() > combo_cap) throw CapExceeded("path enumeration");
        return;
      }
      for (const auto* e : adj[v]) {
        if (on[e->to]) continue;
        on[e->to] = true;
        dfs(e->to, add_sat(w, e->weight));
        on[e->to] = false;
      }
    };
    on[s] = true;
    dfs(s, 0);
  }

  // Grow connected cycle sets around each path.
  u64 combos = 0;
  for (const auto& [pw, pon] : paths) {
    std::set<std::uint64_t> seen{0};
    std::function<void(std::uint64_t, const std::vector<bool>&, u64)> grow = [&](std::uint64_t mask,
                                                                               const std::vector<bool>& covered,
                                                                               u64 base) {
      if (++combos > combo_cap) throw CapExceeded("cycle-set combinations");
      LengthSet::Linear l{base, {}};
      for (std::size_t c = 0; c < cycles.size(); ++c)
        if (mask >> c & 1u) l.periods.push_back(cycles[c].weight);
      out.add(std::move(l));
      for (std::size_t c = 0; c < cycles.size(); ++c) {
        const std::uint64_t next = mask | (std::uint64_t{1} << c);
        if (next == mask || seen.count(next)) continue;
        bool touches = false;
        for (std::size_t v = 0; v < n && !touches; ++v) touches = cycles[c].on[v] && covered[v];
        if (!touches) continue;
        seen.insert(next);
        auto wider = covered;
        for (std::size_t v = 0; v < n; ++v) wider[v] = wider[v] || cycles[c].on[v];
        grow(next, wider, add_sat(base, cycles[c].weight));
      }
    };
    grow(0, pon, pw);
  }
  return out;
}

/// Least total weight of a walk from s to t (kInfinity when none).
inline u64 min_walk_length(const WeightedGraph& g, std::size_t s, std::size_t t) {
  std::vector<u64> dist(g.num_vertices, kInfinity);
  std::vector<std::vector<const WeightedEdge*>> adj(g.num_vertices);
  for (const auto& e : g.edges) adj[e.from].push_back(&e);
  using Item = std::pair<u64, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[s] = 0;
  pq.push({0, s});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d != dist[v]) continue;
    for (const auto* e : adj[v]) {
      const u64 nd = add_sat(d, e->weight);
      if (nd < dist[e->to]) {
        dist[e->to] = nd;
        pq.push({nd, e->to});
      }
    }
  }
  return dist[t];
}

/// Exact-length reachability by dynamic programming over (vertex, length).
inline bool exact_walk_dp(const WeightedGraph& g, std::size_t s, std::size_t t, u64 target, u64 cap) {
  if (target > cap) throw CapExceeded("exact-length horizon");
  const std::size_t n = g.num_vertices;
  const std::size_t words = static_cast<std::size_t>(target / 64 + 1);
  std::vector<std::vector<std::uint64_t>> reach(n, std::vector<std::uint64_t>(words, 0));
  auto get = [&](std::size_t v, u64 len) { return (reach[v][len / 64] >> (len % 64)) & 1u; };
  auto set = [&](std::size_t v, u64 len) { reach[v][len / 64] |= std::uint64_t{1} << (len % 64); };
  set(s, 0);
  std::vector<std::vector<const WeightedEdge*>> adj(n);
  for (const auto& e : g.edges)
    if (e.weight <= target) adj[e.from].push_back(&e);
  for (u64 len = 0; len <= target; ++len)
    for (std::size_t v = 0; v < n; ++v) {
      if (!get(v, len)) continue;
      for (const auto* e : adj[v])
        if (len + e->weight <= target) set(e->to, len + e->weight);
    }
  return get(t, target) != 0;
}

/// Exact-length reachability: symbolic length set first, dynamic program as fallback.
inline bool exact_walk(const WeightedGraph& g, std::size_t s, std::size_t t, u64 target, const Caps& caps = {}) {
  try {
    return walk_lengths(g, s, t, caps.cycle_sets).contains(target);
  } catch (const CapExceeded&) {
    if (target > caps.dp_length) throw;
    return exact_walk_dp(g, s, t, target, caps.dp_length);
  }
}

}  // namespace crpq
