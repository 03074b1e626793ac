#include <gtest/gtest.h>

#include <random>

#include "crpq/boundedness.hpp"
#include "crpq/homomorphism.hpp"
#include "crpq/oracle.hpp"
#include "crpq/parser.hpp"

using namespace crpq;

namespace {

const char* kTwoPatterns = "?y <-[a]- ?x -[a*]-> ?z -[b]-> ?w";

// Random CRPQ(a, a*) with up to `max_atoms` atoms over {x,y,z} and letters {a,b,c}.
CRPQ random_letter_query(std::mt19937_64& rng, std::size_t max_atoms) {
  const std::vector<std::string> vars{"x", "y", "z"};
  const std::vector<Symbol> sigma{"a", "b", "c"};
  CRPQ q;
  const std::size_t atoms = 1 + rng() % max_atoms;
  for (std::size_t i = 0; i < atoms; ++i) {
    const auto& s = vars[rng() % vars.size()];
    const auto& t = vars[rng() % vars.size()];
    const auto& a = sigma[rng() % sigma.size()];
    q.atoms.push_back(Atom::edge(s, rng() % 2 ? RegexExpr::star({a}) : RegexExpr::letter(a), t));
  }
  return q;
}

AnalysisOptions mode(ZplusMode z, bool full) {
  AnalysisOptions o;
  o.zplus_mode = z;
  o.full_enumeration = full;
  return o;
}

}  // namespace

TEST(ComputeBounds, StarAndLetter) {
  const auto b = compute_bounds(parse_crpq("?x -[a*]-> ?y, ?x -[b]-> ?y"));
  EXPECT_EQ(b.nratoms, 2u);
  EXPECT_EQ(b.nrvars, 2u);
  EXPECT_EQ(b.N, 1u);
  EXPECT_EQ(b.W, (std::vector<Word>{{"a"}}));
  EXPECT_EQ(b.Zred, 1u);
  EXPECT_EQ(b.Zcol, 4u);
  EXPECT_EQ(b.Z, 16u);
  EXPECT_EQ(b.Zplus, 33u);
  EXPECT_NE(b.derivation().find("= 16"), std::string::npos);
}

TEST(ComputeBounds, StarFreeUsesEmptyProduct) {
  const auto b = compute_bounds(parse_crpq("?x -[ab]-> ?y, ?y -[c]-> ?z, ?z -[d]-> ?x"));
  EXPECT_TRUE(b.W.empty());
  EXPECT_EQ(b.Zred, 1u);
  EXPECT_EQ(b.N, 2u);
  EXPECT_EQ(b.Z, 27u * 2u * 3u);
}

TEST(ComputeBounds, PowersCountMaterializedLength) {
  const auto b = compute_bounds(parse_crpq("?x -[(aba)*]-> ?y, ?x -[(aba)^3]-> ?z"));
  EXPECT_EQ(b.nrvars, 3u);
  EXPECT_EQ(b.N, 9u);
  EXPECT_EQ(b.Zred, 3u);
  EXPECT_EQ(b.Z, 648u);
  EXPECT_EQ(b.Zplus, 2u * 648u + 1u);
}

TEST(ComputeBounds, UnionTakesFieldwiseMax) {
  const auto b = compute_bounds(parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y | ?x -[(ab)*]-> ?y"));
  ASSERT_EQ(b.per_disjunct.size(), 2u);
  EXPECT_EQ(b.per_disjunct[0].Z, 16u);
  EXPECT_EQ(b.aggregate.Z, 16u);
  EXPECT_EQ(b.aggregate.Zred, 2u);
}

TEST(IsBounded, TwoPatternQuery) {
  const auto q = parse_ucrpq(kTwoPatterns);
  const auto r = is_bounded(q);
  ASSERT_EQ(r.verdict, Outcome::Bounded) << r.reason;
  ASSERT_TRUE(r.rewriting.has_value());
  EXPECT_EQ(*r.rewriting, bound_query(q, r.Z));
  EXPECT_TRUE(is_star_free(*r.rewriting));
  // The rewriting agrees with the two single-step patterns.
  const auto patterns = parse_ucrpq("?w <-[b]- ?x -[a]-> ?y | ?x -[a]-> ?z -[b]-> ?w");
  const auto v = sampled_equivalence(*r.rewriting, patterns, 100, 5, 7);
  EXPECT_EQ(v.kind, Verdict::Kind::Agree);
}

TEST(IsBounded, StarWithParallelLetter) {
  const auto q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y");
  const auto r = is_bounded(q);
  ASSERT_EQ(r.verdict, Outcome::Unbounded);
  EXPECT_EQ(r.Z, 16u);
  EXPECT_EQ(r.Zplus, 33u);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(render(*r.witness), "?x -[a^33]-> ?y, ?x -[b^1]-> ?y");
  EXPECT_FALSE(materialized_expansion_contained(*r.witness, q, r.Z));
}

TEST(IsBounded, StarFreeIsItsOwnRewriting) {
  const auto q = parse_ucrpq("?x -[ab+c]-> ?y, ?y -[d^<=3]-> ?x");
  const auto r = is_bounded(q);
  ASSERT_EQ(r.verdict, Outcome::Bounded);
  EXPECT_EQ(*r.rewriting, q);
  EXPECT_EQ(rewrite(q), q);
}

TEST(IsBounded, LoneStarCollapses) {
  const auto r = is_bounded(parse_ucrpq("?x -[a*]-> ?y"));
  EXPECT_EQ(r.verdict, Outcome::Bounded);
  const auto word = is_bounded(parse_ucrpq("?x -[(ab)*]-> ?y"));
  ASSERT_EQ(word.verdict, Outcome::Bounded);
  EXPECT_EQ(render(*word.rewriting), "?x -[(ab)^<=" + std::to_string(word.Z) + "]-> ?y");
}

TEST(IsBounded, RewriteRefusesUnbounded) {
  EXPECT_THROW(rewrite(parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y")), InvalidArgument);
}

TEST(IsBounded, StarsOverUnionsDoNotParse) {
  EXPECT_THROW(parse_ucrpq("?x -[(a+b)*]-> ?y"), ParseError);
}

TEST(IsBounded, CapsSurfaceAsInconclusive) {
  AnalysisOptions o;
  o.caps.expansions = 1;
  const auto r = is_bounded(parse_ucrpq(kTwoPatterns), o);
  EXPECT_EQ(r.verdict, Outcome::Inconclusive);
  EXPECT_NE(r.reason.find("cap"), std::string::npos);
}

TEST(IsBounded, ModesAgreeOnExamples) {
  const std::vector<std::pair<std::string, Outcome>> cases{
      {kTwoPatterns, Outcome::Bounded},
      {"?x -[a*]-> ?y, ?x -[b]-> ?y", Outcome::Unbounded},
      {"?x -[a*]-> ?y, ?x -[b*]-> ?y", Outcome::Bounded},
      {"?x -[a*]-> ?y, ?y -[a]-> ?x", Outcome::Unbounded},
      {"?x -[(ab)*]-> ?y, ?y -[b]-> ?z", Outcome::Bounded},
  };
  for (const auto& [text, expected] : cases)
    for (auto z : {ZplusMode::Paper, ZplusMode::Safe})
      for (bool full : {false, true}) {
        const auto r = is_bounded(parse_ucrpq(text), mode(z, full));
        EXPECT_EQ(r.verdict, expected) << text << " " << to_string(z) << " full=" << full << " " << r.reason;
      }
}

TEST(IsBounded, SafeModeUsesLargerLongExponent) {
  const auto q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y");
  const auto r = is_bounded(q, mode(ZplusMode::Safe, false));
  ASSERT_EQ(r.verdict, Outcome::Unbounded);
  EXPECT_EQ(r.Zplus, r.bounds.aggregate.Zplus_safe);
  EXPECT_EQ(r.Zplus, 2u * 16u * 1u + 2u + 1u);
  EXPECT_FALSE(materialized_expansion_contained(*r.witness, q, r.Z));
}

// q(Z) is below q and below q(Z+): every expansion of the rewriting maps into itself
// as an expansion of the larger queries.
TEST(BoundednessProperty, TrivialDirection) {
  const auto q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y");
  const auto Z = compute_bounds(q).aggregate.Z;
  ExponentDomain dom(1);
  for (u64 e = 0; e <= Z; e += 5) dom[0].push_back(e);
  for_each_expansion(bound_query(q, Z).disjuncts[0], {}, 1000, [&](const SuccinctCQ& l) {
    EXPECT_TRUE(expansion_contained(l, q).contained) << render(l);
    EXPECT_TRUE(expansion_contained(l, bound_query(q, Z + 1)).contained) << render(l);
    return true;
  });
}

// Bounded verdicts: expansions of q(m) for m just above Z are contained in q(Z).
TEST(BoundednessProperty, BoundedSideSoundness) {
  for (const char* text : {kTwoPatterns, "?x -[a*]-> ?y, ?x -[b*]-> ?y", "?x -[(ab)*]-> ?y, ?y -[b]-> ?z"}) {
    const auto q = parse_ucrpq(text);
    const auto r = is_bounded(q);
    ASSERT_EQ(r.verdict, Outcome::Bounded) << text;
    for (u64 m = r.Z + 1; m <= r.Z + 5; ++m) {
      const CRPQ& d = q.disjuncts[0];
      ExponentDomain dom(ExpansionSpace(d).recursive.size());
      for (auto& c : dom) c = {0, 1, m - 1, m};
      for_each_expansion(d, dom, 10000, [&](const SuccinctCQ& l) {
        EXPECT_TRUE(expansion_contained(l, *r.rewriting).contained) << text << " / " << render(l);
        return true;
      });
    }
  }
}

// Random small queries: Unbounded witnesses fail the materialized check against q(Z),
// Bounded rewritings agree with q on sampled graphs.
TEST(BoundednessProperty, RandomVerdictsCheckedByOracle) {
  std::mt19937_64 rng(41);
  int bounded = 0, unbounded = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const UCRPQ q{{random_letter_query(rng, 3)}};
    const auto r = is_bounded(q);
    ASSERT_NE(r.verdict, Outcome::Inconclusive) << render(q) << " " << r.reason;
    if (r.verdict == Outcome::Unbounded) {
      ++unbounded;
      ASSERT_TRUE(r.witness.has_value());
      if (ExpansionSpace(q.disjuncts[0]).recursive.size() <= 2) {
        EXPECT_FALSE(materialized_expansion_contained(*r.witness, q, r.Z)) << render(q);
      }
    } else {
      ++bounded;
      const auto v = sampled_equivalence(q, *r.rewriting, 30, 4, 100 + trial, 6, 200);
      EXPECT_EQ(v.kind, Verdict::Kind::Agree) << render(q);
    }
  }
  EXPECT_GT(bounded, 0);
  EXPECT_GT(unbounded, 0);
}

TEST(IsBoundedIn, EmptySetIsTrivial) {
  const auto r = is_bounded_in(parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y"), {});
  ASSERT_EQ(r.verdict, Outcome::Bounded);
  EXPECT_EQ(*r.rewriting, parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y"));
}

TEST(IsBoundedIn, LeafStarIsBounded) {
  const auto q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y, ?x -[c*]-> ?w");
  const auto c = is_bounded_in(q, {"c"});
  ASSERT_EQ(c.verdict, Outcome::Bounded) << c.reason;
  EXPECT_EQ(*c.rewriting, bound_letters(q, {"c"}, c.Z));
  EXPECT_EQ(is_bounded_in(q, {"a"}).verdict, Outcome::Unbounded);
}

TEST(IsBoundedIn, NeedsLetterStars) {
  const auto r = is_bounded_in(parse_ucrpq("?x -[(ab)*]-> ?y"), {"a"});
  EXPECT_EQ(r.verdict, Outcome::Inconclusive);
}

TEST(MaximalLetters, Examples) {
  const auto c = maximal_bounded_letters(parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y, ?x -[c*]-> ?w"));
  EXPECT_EQ(c.letters, (std::set<Symbol>{"c"}));
  EXPECT_FALSE(c.partial);
  ASSERT_TRUE(c.combined.has_value());
  EXPECT_EQ(c.combined->verdict, Outcome::Bounded);

  const auto disjoint = maximal_bounded_letters(parse_ucrpq("?x -[a*]-> ?y, ?z -[b*]-> ?w"));
  EXPECT_EQ(disjoint.letters, (std::set<Symbol>{"a", "b"}));

  // Boolean semantics: the empty expansion of both stars maps anywhere.
  const auto parallel = maximal_bounded_letters(parse_ucrpq("?x -[a*]-> ?y, ?x -[b*]-> ?y"));
  EXPECT_EQ(parallel.letters, (std::set<Symbol>{"a", "b"}));
  // With x and y free, neither letter is bounded.
  const auto free = maximal_bounded_letters(reduce_free_vars(parse_ucrpq("?x -[a*]-> ?y, ?x -[b*]-> ?y"), {"x", "y"}));
  EXPECT_TRUE(free.letters.empty());

  EXPECT_TRUE(maximal_bounded_letters(parse_ucrpq("?x -[ab]-> ?y")).letters.empty());
}

TEST(LetterProperty, MonotoneUnderSubsets) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const UCRPQ q{{random_letter_query(rng, 3)}};
    const auto stars = star_letters(q);
    if (is_bounded_in(q, stars).verdict != Outcome::Bounded) continue;
    for (const auto& a : stars) EXPECT_EQ(is_bounded_in(q, {a}).verdict, Outcome::Bounded) << render(q) << " " << a;
  }
}

TEST(LetterProperty, Confluence) {
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const UCRPQ q{{random_letter_query(rng, 3)}};
    const auto stars = star_letters(q);
    for (auto i = stars.begin(); i != stars.end(); ++i)
      for (auto j = std::next(i); j != stars.end(); ++j) {
        if (is_bounded_in(q, {*i}).verdict != Outcome::Bounded) continue;
        if (is_bounded_in(q, {*j}).verdict != Outcome::Bounded) continue;
        ++checked;
        EXPECT_EQ(is_bounded_in(q, {*i, *j}).verdict, Outcome::Bounded) << render(q);
      }
  }
  EXPECT_GT(checked, 0);
}

TEST(LetterProperty, FullAlphabetMatchesBoundedness) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 60; ++trial) {
    const UCRPQ q{{random_letter_query(rng, 3)}};
    EXPECT_EQ(is_bounded(q).verdict, is_bounded_in(q, star_letters(q)).verdict) << render(q);
  }
}
