#pragma once

// Boundedness of UCRPQs whose atoms are simple star-free expressions or stars over
// single words.
//
// q is bounded iff every expansion whose star exponents come from {0..Z} u {Z+} is
// contained in q(Z), the query with each w* replaced by w^{<=Z}. The bounds Z and Z+
// depend only on atom and variable counts and on word lengths.
//
// The exponent vectors are explored coordinate by coordinate. Two facts keep the
// search small:
//   * an expansion with all exponents <= Z is an expansion of q(Z), so it is contained;
//   * if an expansion maps into q(Z) while avoiding the middle position of some star
//     atoms (a "hole"), every expansion with those exponents raised is contained too,
//     because the extra iterations can be inserted at the hole.

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crpq/common.hpp"
#include "crpq/expansion.hpp"
#include "crpq/homomorphism.hpp"
#include "crpq/syntax.hpp"

namespace crpq {

enum class ZplusMode { Paper, Safe };

inline std::string to_string(ZplusMode m) { return m == ZplusMode::Paper ? "paper" : "safe"; }

struct BoundsProfile {
  u64 nratoms = 0;
  u64 nrvars = 0;
  u64 N = 1;             // longest materialized word of a non-recursive atom (at least 1)
  std::vector<Word> W;   // distinct words under stars
  u64 Zred = 1;          // product of |w| over W
  u64 Zcol = 0;          // nratoms * N * nrvars * Zred
  u64 Z = 0;             // nratoms^2 * Zcol
  u64 Zplus = 0;         // nratoms * Z + 1
  u64 Zplus_safe = 0;    // nratoms * Z * max word length + nrvars + 1

  u64 zplus(ZplusMode m) const { return m == ZplusMode::Paper ? Zplus : Zplus_safe; }

  /// One line showing how Z and Z+ were obtained.
  std::string derivation(ZplusMode m = ZplusMode::Paper) const {
    std::ostringstream out;
    out << "Z = nratoms^3 * N * nrvars * Zred = " << nratoms << "^3 * " << N << " * " << nrvars << " * " << Zred
        << " = " << Z;
    if (m == ZplusMode::Paper)
      out << "; Z+ = nratoms * Z + 1 = " << Zplus;
    else
      out << "; Z+ (safe) = nratoms * Z * maxlen + nrvars + 1 = " << Zplus_safe;
    return out.str();
  }

  bool operator==(const BoundsProfile&) const = default;
};

struct Bounds {
  std::vector<BoundsProfile> per_disjunct;
  BoundsProfile aggregate;  // field-wise maximum; its Z bounds the shared rewriting
};

inline BoundsProfile compute_bounds(const CRPQ& raw) {
  const CRPQ q = collapse(raw);
  BoundsProfile b;
  u64 longest = 0;
  std::set<Word> words;
  for (const auto& a : q.atoms) {
    if (a.kind != Atom::Kind::Edge) continue;
    ++b.nratoms;
    if (is_recursive(a)) {
      words.insert(a.label.word);
    } else {
      const auto c = classify(a.label);
      if (c == FragmentClass::Unsupported || c == FragmentClass::AStar || c == FragmentClass::WStar)
        throw InvalidArgument("star nested inside a larger expression: " + render(a.label));
      longest = std::max(longest, longest_word(a.label));
    }
  }
  b.nrvars = variables(q).size();
  b.N = std::max<u64>(1, longest);
  b.W.assign(words.begin(), words.end());
  u64 maxlen = b.N;
  for (const auto& w : b.W) {
    b.Zred = mul_checked(b.Zred, w.size());
    maxlen = std::max<u64>(maxlen, w.size());
  }
  b.Zcol = mul_checked(mul_checked(mul_checked(b.nratoms, b.N), b.nrvars), b.Zred);
  b.Z = mul_checked(mul_checked(b.nratoms, b.nratoms), b.Zcol);
  b.Zplus = add_checked(mul_checked(b.nratoms, b.Z), 1);
  b.Zplus_safe = add_checked(add_checked(mul_checked(mul_checked(b.nratoms, b.Z), maxlen), b.nrvars), 1);
  return b;
}

inline Bounds compute_bounds(const UCRPQ& q) {
  Bounds out;
  for (const auto& d : q.disjuncts) out.per_disjunct.push_back(compute_bounds(d));
  if (out.per_disjunct.empty()) return out;
  auto& g = out.aggregate;
  g = out.per_disjunct.front();
  std::set<Word> words(g.W.begin(), g.W.end());
  for (const auto& b : out.per_disjunct) {
    g.nratoms = std::max(g.nratoms, b.nratoms);
    g.nrvars = std::max(g.nrvars, b.nrvars);
    g.N = std::max(g.N, b.N);
    words.insert(b.W.begin(), b.W.end());
    g.Zred = std::max(g.Zred, b.Zred);
    g.Zcol = std::max(g.Zcol, b.Zcol);
    g.Z = std::max(g.Z, b.Z);
    g.Zplus = std::max(g.Zplus, b.Zplus);
    g.Zplus_safe = std::max(g.Zplus_safe, b.Zplus_safe);
  }
  g.W.assign(words.begin(), words.end());
  return out;
}

enum class Outcome { Bounded, Unbounded, Inconclusive };

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Bounded: return "bounded";
    case Outcome::Unbounded: return "unbounded";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "";
}

struct AnalysisOptions {
  Caps caps;
  ZplusMode zplus_mode = ZplusMode::Paper;
  bool full_enumeration = false;  // exponents 0..Z+ instead of {0..Z} u {Z+}
};

struct AnalysisReport {
  Outcome verdict = Outcome::Inconclusive;
  std::string reason;                       // why the run was inconclusive
  Bounds bounds;
  u64 Z = 0;                                // the bound used for the rewriting
  u64 Zplus = 0;                            // the long exponent used for the left expansions
  std::optional<std::set<Symbol>> letters;  // set for letter-restricted runs
  std::optional<UCRPQ> rewriting;           // Bounded: q(Z), or q[A -> Z] for letter runs
  std::optional<SuccinctCQ> witness;        // Unbounded: an expansion not contained in the rewriting
  std::optional<std::size_t> witness_disjunct;
  Stats stats;
  double wall_ms = 0;
};

namespace detail {

// Explores the exponent vectors of one disjunct for one choice of the non-recursive atoms.
class ExponentSearch {
 public:
  // `limited[c]`: coordinate c ranges over {0..Z} u {Z+} (or 0..Z+); otherwise it is a
  // star kept in the target and ranges over all naturals.
  ExponentSearch(const ExpansionSpace& space, std::vector<AtomChoice> choice, std::vector<bool> limited,
                 const UCRPQ& target, u64 Z, u64 Zplus, const AnalysisOptions& opt, Stats& stats,
                 const Deadline& deadline)
      : space_(space),
        choice_(std::move(choice)),
        limited_(std::move(limited)),
        target_(target),
        Z_(Z),
        Zplus_(Zplus),
        opt_(opt),
        stats_(stats),
        deadline_(deadline),
        exps_(space.recursive.size(), 0) {}

  /// The first uncontained expansion, or nothing when every one is contained.
  std::optional<SuccinctCQ> run() {
    level(0);
    return witness_;
  }

 private:
  using Mask = std::vector<bool>;
  struct Masks {
    Mask up_to_z;    // raising these coordinates (up to Z) keeps every leaf covered
    Mask unbounded;  // raising these coordinates arbitrarily keeps every leaf covered
  };

  std::size_t dims() const { return space_.recursive.size(); }

  Masks level(std::size_t d) {
    if (d == dims()) return leaf();
    Masks acc{Mask(dims(), true), Mask(dims(), true)};
    u64 v = 0;
    while (true) {
      exps_[d] = v;
      const Masks sub = level(d + 1);
      if (witness_) return acc;
      for (std::size_t c = 0; c < dims(); ++c) {
        acc.up_to_z[c] = acc.up_to_z[c] && sub.up_to_z[c];
        acc.unbounded[c] = acc.unbounded[c] && sub.unbounded[c];
      }
      if (sub.unbounded[d]) break;
      if (!limited_[d]) {
        // A kept star: keep lengthening until a hole certificate covers the rest.
        if (v >= Zplus_) throw CapExceeded("no certificate for a star kept in the rewriting");
        ++v;
        continue;
      }
      u64 next = v + 1;
      if (sub.up_to_z[d] && v <= Z_) next = std::max(next, Z_ + 1);
      if (opt_.full_enumeration) {
        if (next > Zplus_) break;
        v = next;
      } else if (next <= Z_) {
        v = next;
      } else if (v < Zplus_) {
        v = Zplus_;
      } else {
        break;
      }
    }
    return acc;
  }

  Masks leaf() {
    deadline_.check();
    if (++stats_.expansions_checked > opt_.caps.expansions) throw CapExceeded("expansions");
    bool trivial = true;
    for (std::size_t c = 0; c < dims(); ++c)
      if (limited_[c] && exps_[c] > Z_) trivial = false;
    if (trivial) {
      Masks m{Mask(dims(), true), Mask(dims(), false)};
      for (std::size_t c = 0; c < dims(); ++c) m.unbounded[c] = !limited_[c];
      return m;
    }

    auto choice = choice_;
    for (std::size_t c = 0; c < dims(); ++c) choice[space_.recursive[c]].exponents = {exps_[c]};
    std::vector<long> image;
    const SuccinctCQ lambda = space_.instantiate(choice, &image);

    SearchContext ctx{opt_.caps, &stats_, &deadline_};
    // Coordinates that can carry a certificate: a hole in the middle of a bounded star's
    // path, or (for a star kept in the target) the whole path as one opaque edge.
    // In the restricted domain Z+ is the last value, so a hole there buys nothing.
    std::vector<std::size_t> eligible;
    for (std::size_t c = 0; c < dims(); ++c) {
      if (image[c] < 0) continue;
      if (!limited_[c]) {
        eligible.push_back(c);
        continue;
      }
      if (lambda.atoms[static_cast<std::size_t>(image[c])].length() < 2) continue;
      if (!opt_.full_enumeration && exps_[c] >= Zplus_) continue;
      eligible.push_back(c);
    }
    // Try the widest set first, then drop the outermost coordinates one at a time.
    for (std::size_t from = 0; from < eligible.size(); ++from) {
      const std::vector<std::size_t> subset(eligible.begin() + static_cast<std::ptrdiff_t>(from), eligible.end());
      if (certified(lambda, image, subset, ctx)) {
        Mask m(dims(), false);
        for (auto c : subset) m[c] = true;
        return {m, m};
      }
    }
    if (expansion_contained(lambda, target_, ctx).contained) {
      ++stats_.zplus_uncertified;
      return {Mask(dims(), false), Mask(dims(), false)};
    }
    witness_ = lambda;
    return {Mask(dims(), false), Mask(dims(), false)};
  }

  // Containment of lambda with holes in the bounded coordinates of `subset` and the
  // kept-star coordinates of `subset` replaced by one fresh edge each; a target star over
  // the same word may take that edge whole, which stays valid for any longer path.
  bool certified(const SuccinctCQ& lambda, const std::vector<long>& image, const std::vector<std::size_t>& subset,
                 const SearchContext& ctx) {
    SuccinctCQ left = lambda;
    std::vector<Hole> holes;
    std::map<Word, std::vector<Symbol>> opaque;
    std::set<long> done;
    for (auto c : subset) {
      const long j = image[c];
      if (!done.insert(j).second) continue;
      auto& atom = left.atoms[static_cast<std::size_t>(j)];
      if (limited_[c]) {
        holes.push_back({static_cast<std::size_t>(j), atom.length() / 2});
      } else {
        const Symbol edge = "<" + detail::render_word(atom.word) + "*#" + std::to_string(j) + ">";
        opaque[atom.word].push_back(edge);
        atom.word = {edge};
        atom.exponent = 1;
      }
    }
    if (opaque.empty()) return expansion_contained(left, target_, ctx, holes).contained;
    UCRPQ target = target_;
    for (auto& d : target.disjuncts)
      for (auto& a : d.atoms) {
        if (!is_recursive(a)) continue;
        auto it = opaque.find(a.label.word);
        if (it == opaque.end()) continue;
        std::vector<RegexExpr> parts{a.label};
        for (const auto& e : it->second) parts.push_back(RegexExpr::letter(e));
        a.label = RegexExpr::alt(parts);
      }
    return expansion_contained(left, target, ctx, holes).contained;
  }

  const ExpansionSpace& space_;
  std::vector<AtomChoice> choice_;
  std::vector<bool> limited_;
  const UCRPQ& target_;
  u64 Z_, Zplus_;
  const AnalysisOptions& opt_;
  Stats& stats_;
  const Deadline& deadline_;
  std::vector<u64> exps_;
  std::optional<SuccinctCQ> witness_;
};

// Alternatives (term, exponents) of a non-recursive atom.
inline std::vector<AtomChoice> atom_options(const std::vector<Term>& terms, u64 cap) {
  std::vector<AtomChoice> out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& term = terms[t];
    std::vector<u64> exps(term.size());
    for (std::size_t s = 0; s < term.size(); ++s) exps[s] = term[s].lo;
    while (true) {
      out.push_back({t, exps});
      if (out.size() > cap) throw CapExceeded("expansions");
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
  return out;
}

// Shared driver: `limit` selects the star atoms whose exponents are bounded by the
// rewriting; the others stay stars in `target`.
inline AnalysisReport analyze(const UCRPQ& q, const std::function<bool(const Atom&)>& limit,
                              const std::function<UCRPQ(u64)>& make_target, const AnalysisOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  AnalysisReport r;
  auto finish = [&]() {
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
  };
  if (!in_ssf_wstar(q)) {
    r.verdict = Outcome::Inconclusive;
    r.reason = "unsupported fragment: labels must be simple star-free or stars over a word";
    return finish();
  }
  try {
    r.bounds = compute_bounds(q);
  } catch (const CapExceeded& e) {
    r.reason = e.what();
    return finish();
  }
  r.Z = r.bounds.aggregate.Z;
  r.Zplus = r.bounds.aggregate.zplus(opt.zplus_mode);
  const UCRPQ target = make_target(r.Z);
  const Deadline deadline(opt.caps.time_budget_ms);
  try {
    for (std::size_t di = 0; di < q.disjuncts.size(); ++di) {
      const ExpansionSpace space(q.disjuncts[di], opt.caps.branch_blowup);
      std::vector<bool> limited;
      for (auto i : space.recursive) limited.push_back(limit(space.query.atoms[i]));
      std::vector<std::vector<AtomChoice>> options(space.query.atoms.size());
      for (std::size_t i = 0; i < space.query.atoms.size(); ++i) {
        if (std::find(space.recursive.begin(), space.recursive.end(), i) != space.recursive.end())
          options[i].push_back({0, {0}});
        else
          options[i] = atom_options(space.terms[i], opt.caps.expansions);
      }
      std::vector<std::size_t> idx(options.size(), 0);
      while (true) {
        std::vector<AtomChoice> choice;
        for (std::size_t i = 0; i < options.size(); ++i) choice.push_back(options[i][idx[i]]);
        ExponentSearch search(space, choice, limited, target, r.Z, r.Zplus, opt, r.stats, deadline);
        if (auto w = search.run()) {
          r.verdict = Outcome::Unbounded;
          r.witness = *w;
          r.witness_disjunct = di;
          return finish();
        }
        bool advanced = false;
        for (std::size_t i = options.size(); i-- > 0;) {
          if (++idx[i] < options[i].size()) {
            advanced = true;
            break;
          }
          idx[i] = 0;
        }
        if (!advanced) break;
      }
    }
  } catch (const CapExceeded& e) {
    r.verdict = Outcome::Inconclusive;
    r.reason = e.what();
    return finish();
  }
  r.verdict = Outcome::Bounded;
  r.rewriting = target;
  return finish();
}

}  // namespace detail

/// Decides whether q is equivalent to a union of conjunctive queries; when it is, the
/// rewriting is q(Z).
inline AnalysisReport is_bounded(const UCRPQ& q, const AnalysisOptions& opt = {}) {
  return detail::analyze(
      q, [](const Atom&) { return true; }, [&](u64 Z) { return bound_query(q, Z); }, opt);
}

/// The star-free rewriting q(Z) of a bounded query.
inline UCRPQ rewrite(const UCRPQ& q, const AnalysisOptions& opt = {}) {
  const auto r = is_bounded(q, opt);
  if (r.verdict != Outcome::Bounded)
    throw InvalidArgument("rewrite needs a bounded query; the analysis was " + to_string(r.verdict));
  return *r.rewriting;
}

/// Whether q is equivalent to q[A -> Z] (the a* atoms with a in A bounded, the other
/// stars kept). Every star must be over a single letter.
inline AnalysisReport is_bounded_in(const UCRPQ& q, const std::set<Symbol>& A, const AnalysisOptions& opt = {}) {
  if (!in_ssf_wstar(q, true)) {
    AnalysisReport r;
    r.reason = "letter-boundedness needs stars over single letters";
    r.letters = A;
    return r;
  }
  auto r = detail::analyze(
      q, [&](const Atom& a) { return A.count(a.label.word.front()) > 0; },
      [&](u64 Z) { return bound_letters(q, A, Z); }, opt);
  r.letters = A;
  return r;
}

/// Letters a that occur under a star (a*) in q.
inline std::set<Symbol> star_letters(const UCRPQ& q) {
  std::set<Symbol> out;
  for (const auto& d : q.disjuncts)
    for (const auto& a : d.atoms)
      if (is_recursive(a) && a.label.word.size() == 1) out.insert(a.label.word.front());
  return out;
}

struct LetterReport {
  std::set<Symbol> letters;                  // the maximal set found (star letters only)
  std::map<Symbol, Outcome> per_letter;      // single-letter verdicts
  bool partial = false;                      // some letter was inconclusive: an under-approximation
  std::optional<AnalysisReport> combined;    // the check of the whole set, with its rewriting
};

/// The unique maximal set of star letters A such that q is A-bounded. Letters without
/// a star are bounded vacuously and are not listed.
inline LetterReport maximal_bounded_letters(const UCRPQ& q, const AnalysisOptions& opt = {}) {
  LetterReport out;
  for (const auto& a : star_letters(q)) {
    const auto r = is_bounded_in(q, {a}, opt);
    out.per_letter[a] = r.verdict;
    if (r.verdict == Outcome::Bounded) out.letters.insert(a);
    if (r.verdict == Outcome::Inconclusive) out.partial = true;
  }
  out.combined = is_bounded_in(q, out.letters, opt);
  return out;
}

}  // namespace crpq
