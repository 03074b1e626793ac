#pragma once

// Instance generator: a forall-exists 3-CNF formula becomes a pair of queries q1, q2
// over the alphabet {a, b, s, j, x1.., y1..} such that the formula is true iff q1 is
// contained in q2, iff q1 AND q2 is bounded.
//
// Truth values are encoded by two tiny patterns hanging below a node p:
//   t:  p <-b m <-a leaf        f:  p <-b m -a-> leaf
// and the universal choice for x_i by  p <-b m <-a* k -a-> leaf, whose a^0 expansion
// is f and whose a^1 expansion contains t.
//
// q1 is a j-path e0 -> e1 -> root -> e3 -> e4 with an s self-loop on each node.
//   root -x_i-> d_x<i>      carrying the universal tail gadget
//   root -y_i-> d_y<i>_t    carrying t, then d_y<i>_t -y_i-> y_<i>_t
//   root -y_i-> d_y<i>_f    carrying f, then d_y<i>_f -y_i-> y_<i>_f
//   e<k> -x_i/y_i-> junk    junk carries both t and f and reaches y_<i>_t and y_<i>_f
// q2 has one gadget per clause: c<k>_1 -j-> c<k>_2 -j-> c<k>_3, an s.s* loop on c<k>_1,
// and under c<k>_p the check for literal p (t for positive, f for negative). Literals
// on y_i continue with -y_i-> y_<i>_tf, a variable shared by all clauses. Mapping
// c<k>_1 to e0, e1 or root makes exactly one literal land on root; the others land on junk.

#include <array>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crpq/common.hpp"
#include "crpq/syntax.hpp"

namespace crpq {

/// forall x_1..x_n exists y_1..y_l, clauses of three literals. Literal +-v with
/// 1 <= v <= n naming x_v and n < v <= n + l naming y_{v-n}.
struct QBF {
  int n = 0;
  int l = 0;
  std::vector<std::array<int, 3>> clauses;

  bool operator==(const QBF&) const = default;

  void validate() const {
    if (n < 0 || l < 0) throw InvalidArgument("negative variable count");
    for (const auto& c : clauses)
      for (int lit : c)
        if (lit == 0 || std::abs(lit) > n + l) throw InvalidArgument("literal " + std::to_string(lit) + " out of range");
  }
};

/// Reads `forall a..b`, `exists c..d` and clause lines of three signed integers
/// (a trailing 0 is allowed). Lines starting with `c` or `p` are ignored.
inline QBF parse_qbf(std::string_view text) {
  QBF q;
  std::set<int> forall, exists;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto range = [&](const std::string& ranges, std::set<int>& into) {
    std::istringstream parts(ranges);
    std::string item;
    while (parts >> item) {
      const auto dots = item.find("..");
      try {
        if (dots == std::string::npos) {
          into.insert(std::stoi(item));
        } else {
          const int lo = std::stoi(item.substr(0, dots)), hi = std::stoi(item.substr(dots + 2));
          for (int v = lo; v <= hi; ++v) into.insert(v);
        }
      } catch (const std::logic_error&) {
        throw ParseError("bad variable range '" + item + "'", line_no, 1);
      }
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream words(line);
    std::string head;
    if (!(words >> head)) continue;
    if (head == "c" || head == "p" || head[0] == '#') continue;
    std::string rest;
    std::getline(words, rest);
    if (head == "forall" || head == "a") {
      range(rest, forall);
      continue;
    }
    if (head == "exists" || head == "e") {
      range(rest, exists);
      continue;
    }
    std::istringstream nums(line);
    std::vector<int> lits;
    int v = 0;
    while (nums >> v) lits.push_back(v);
    if (!nums.eof()) throw ParseError("expected integers in clause", line_no, 1);
    if (!lits.empty() && lits.back() == 0) lits.pop_back();
    if (lits.size() != 3) throw ParseError("clauses must have exactly three literals", line_no, 1);
    q.clauses.push_back({lits[0], lits[1], lits[2]});
  }
  q.n = static_cast<int>(forall.size());
  q.l = static_cast<int>(exists.size());
  int expect = 1;
  for (int v : forall)
    if (v != expect++) throw ParseError("universal variables must be numbered 1..n", line_no, 1);
  for (int v : exists)
    if (v != expect++) throw ParseError("existential variables must be numbered n+1..n+l", line_no, 1);
  q.validate();
  return q;
}

inline std::string render(const QBF& q) {
  std::ostringstream out;
  if (q.n > 0) out << "forall 1.." << q.n << "\n";
  if (q.l > 0) out << "exists " << q.n + 1 << ".." << q.n + q.l << "\n";
  for (const auto& c : q.clauses) out << c[0] << " " << c[1] << " " << c[2] << "\n";
  return out.str();
}

namespace detail {

inline void add(CRPQ& q, const std::string& x, const Symbol& s, const std::string& y) {
  q.atoms.push_back(Atom::edge(x, RegexExpr::letter(s), y));
}

// t below p:  p <-b m <-a leaf
inline void t_pattern(CRPQ& q, const std::string& p) {
  add(q, p + "_m", "b", p);
  add(q, p + "_leaf", "a", p + "_m");
}

// f below p:  p <-b m -a-> leaf
inline void f_pattern(CRPQ& q, const std::string& p, const std::string& m_suffix = "_m",
                      const std::string& leaf_suffix = "_leaf") {
  add(q, p + m_suffix, "b", p);
  add(q, p + m_suffix, "a", p + leaf_suffix);
}

}  // namespace detail

inline Symbol x_symbol(int i) { return "x" + std::to_string(i); }
inline Symbol y_symbol(int i) { return "y" + std::to_string(i); }

inline CRPQ build_q1(const QBF& phi) {
  phi.validate();
  using detail::add;
  CRPQ q;
  const std::vector<std::string> spine{"e0", "e1", "root", "e3", "e4"};
  for (std::size_t k = 0; k + 1 < spine.size(); ++k) add(q, spine[k], "j", spine[k + 1]);
  for (const auto& v : spine) add(q, v, "s", v);

  for (int i = 1; i <= phi.n; ++i) {
    const std::string d = "d_x" + std::to_string(i);
    add(q, "root", x_symbol(i), d);
    add(q, d + "_m", "b", d);
    q.atoms.push_back(Atom::edge(d + "_k", RegexExpr::star({"a"}), d + "_m"));
    add(q, d + "_k", "a", d + "_leaf");
  }
  for (int i = 1; i <= phi.l; ++i) {
    const std::string dt = "d_y" + std::to_string(i) + "_t", df = "d_y" + std::to_string(i) + "_f";
    const std::string yt = "y_" + std::to_string(i) + "_t", yf = "y_" + std::to_string(i) + "_f";
    add(q, "root", y_symbol(i), dt);
    detail::t_pattern(q, dt);
    add(q, dt, y_symbol(i), yt);
    add(q, "root", y_symbol(i), df);
    detail::f_pattern(q, df);
    add(q, df, y_symbol(i), yf);
  }
  if (phi.n + phi.l > 0) {
    detail::t_pattern(q, "junk");
    detail::f_pattern(q, "junk", "_fm", "_fleaf");
    for (int i = 1; i <= phi.l; ++i) {
      add(q, "junk", y_symbol(i), "y_" + std::to_string(i) + "_t");
      add(q, "junk", y_symbol(i), "y_" + std::to_string(i) + "_f");
    }
    for (const auto& e : {"e0", "e1", "e3", "e4"}) {
      for (int i = 1; i <= phi.n; ++i) add(q, e, x_symbol(i), "junk");
      for (int i = 1; i <= phi.l; ++i) add(q, e, y_symbol(i), "junk");
    }
  }
  return q;
}

inline CRPQ build_q2(const QBF& phi) {
  phi.validate();
  using detail::add;
  CRPQ q;
  for (std::size_t k = 0; k < phi.clauses.size(); ++k) {
    const std::string c = "c" + std::to_string(k + 1);
    add(q, c + "_1", "j", c + "_2");
    add(q, c + "_2", "j", c + "_3");
    add(q, c + "_1", "s", c + "_s");
    q.atoms.push_back(Atom::edge(c + "_s", RegexExpr::star({"s"}), c + "_1"));
    for (int p = 0; p < 3; ++p) {
      const int lit = phi.clauses[k][p];
      const int var = std::abs(lit);
      const bool universal = var <= phi.n;
      const Symbol sym = universal ? x_symbol(var) : y_symbol(var - phi.n);
      const std::string v = c + "_l" + std::to_string(p + 1);
      add(q, c + "_" + std::to_string(p + 1), sym, v);
      if (lit > 0)
        detail::t_pattern(q, v);
      else
        detail::f_pattern(q, v);
      if (!universal) add(q, v, sym, "y_" + std::to_string(var - phi.n) + "_tf");
    }
  }
  return q;
}

/// q1 AND q2 as one conjunctive query (their variable names are disjoint).
inline CRPQ reduction(const QBF& phi) {
  CRPQ q = build_q1(phi);
  const CRPQ q2 = build_q2(phi);
  q.atoms.insert(q.atoms.end(), q2.atoms.begin(), q2.atoms.end());
  return q;
}

}  // namespace crpq
