#include <gtest/gtest.h>

#include <random>

#include "crpq/expansion.hpp"
#include "crpq/homomorphism.hpp"
#include "crpq/oracle.hpp"
#include "crpq/parser.hpp"

using namespace crpq;

TEST(BoundQuery, ReplacesStars) {
  EXPECT_EQ(render(bound_query(parse_ucrpq("?x -[(ab)*]-> ?y"), 2)), "?x -[(ab)^<=2]-> ?y");
  EXPECT_EQ(render(bound_query(parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y"), 0)), "?x -[a^<=0]-> ?y, ?x -[b]-> ?y");
  const auto star_free = parse_ucrpq("?x -[(ab)^3+c]-> ?y");
  EXPECT_EQ(bound_query(star_free, 7), star_free);
}

TEST(BoundLetters, OnlyChosenLetters) {
  const auto q = parse_ucrpq("?x -[a*]-> ?y, ?z -[b*]-> ?w");
  EXPECT_EQ(render(bound_letters(q, {"a"}, 3)), "?x -[a^<=3]-> ?y, ?z -[b*]-> ?w");
  EXPECT_EQ(bound_letters(q, {}, 3), q);
  EXPECT_EQ(bound_letters(q, {"a", "b"}, 5), bound_query(q, 5));
}

TEST(AtomExpansion, Paths) {
  auto e = atom_expansion("x", "y", parse_word("abc"));
  ASSERT_FALSE(e.equality);
  ASSERT_EQ(e.path.size(), 3u);
  EXPECT_EQ(e.path[0], (CQAtom{"x", "a", "z1"}));
  EXPECT_EQ(e.path[1], (CQAtom{"z1", "b", "z2"}));
  EXPECT_EQ(e.path[2], (CQAtom{"z2", "c", "y"}));
  EXPECT_TRUE(atom_expansion("x", "y", {}).equality);
  auto single = atom_expansion("x", "y", {"a"});
  ASSERT_EQ(single.path.size(), 1u);
  EXPECT_EQ(single.path[0], (CQAtom{"x", "a", "y"}));
}

TEST(Enumerate, SingleStar) {
  auto out = enumerate_expansions(parse_crpq("?x -[a*]-> ?y"), {{0, 1, 2}}, 100);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_TRUE(out[0].atoms.empty());
  EXPECT_EQ(out[0].variables, std::vector<std::string>{"x"});
  EXPECT_EQ(render(out[1]), "?x -[a^1]-> ?y");
  EXPECT_EQ(render(out[2]), "?x -[a^2]-> ?y");
}

TEST(Enumerate, UnionBranches) {
  auto out = enumerate_expansions(parse_crpq("?x -[a+b]-> ?y"), {}, 100);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(render(out[0]), "?x -[a^1]-> ?y");
  EXPECT_EQ(render(out[1]), "?x -[b^1]-> ?y");
}

TEST(Enumerate, ZeroExponentCollapses) {
  auto out = enumerate_expansions(parse_crpq("?x -[a*]-> ?y, ?x -[b]-> ?y"), {{0, 1}}, 100);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(render(out[0]), "?x -[b^1]-> ?x");
  EXPECT_EQ(render(out[1]), "?x -[a^1]-> ?y, ?x -[b^1]-> ?y");
}

TEST(Enumerate, SuccinctPowersStaySymbolic) {
  auto out = enumerate_expansions(parse_crpq("?x -[a(bc)^1000d]-> ?y"), {}, 10);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(render(out[0]), "?x -[a^1]-> ?_m0_1, ?_m0_1 -[(bc)^1000]-> ?_m0_2, ?_m0_2 -[d^1]-> ?y");
  EXPECT_EQ(out[0].materialized_size(), 2002u);
}

TEST(Enumerate, BoundedPowersAndCap) {
  auto out = enumerate_expansions(parse_crpq("?x -[a^<=3]-> ?y"), {}, 10);
  EXPECT_EQ(out.size(), 4u);
  EXPECT_THROW(enumerate_expansions(parse_crpq("?x -[a^<=30]-> ?y"), {}, 10), CapExceeded);
}

TEST(Enumerate, CapOnStream) {
  EXPECT_THROW(enumerate_expansions(parse_crpq("?x -[a*]-> ?y"), {{0, 1, 2, 3}}, 3), CapExceeded);
}

TEST(Materialize, Unrolls) {
  auto cq = materialize(parse_succinct_cq("?x -[(ab)^2]-> ?y"));
  EXPECT_EQ(render(cq), "?x -[a^1]-> ?z1, ?z1 -[b^1]-> ?z2, ?z2 -[a^1]-> ?z3, ?z3 -[b^1]-> ?y");
  SuccinctCQ lone;
  lone.variables = {"x"};
  auto one = materialize(lone);
  EXPECT_EQ(one.variables, std::vector<std::string>{"x"});
  EXPECT_TRUE(one.atoms.empty());
  EXPECT_THROW(materialize(parse_succinct_cq("?x -[a^6]-> ?y"), 5), CapExceeded);
}

TEST(Materialize, SkipsTakenNames) {
  auto cq = materialize(parse_succinct_cq("?z1 -[a^2]-> ?y"));
  EXPECT_EQ(render(cq), "?z1 -[a^1]-> ?z2, ?z2 -[a^1]-> ?y");
}

TEST(SuccinctText, RoundTrip) {
  const auto l = parse_succinct_cq("?x -[(ab)^5]-> ?y, ?y -[c^1]-> ?y, ?w = ?w");
  EXPECT_EQ(parse_succinct_cq(render(l)), l);
  EXPECT_EQ(l.variables, (std::vector<std::string>{"w", "x", "y"}));
}

// Every emitted expansion of q with star exponents <= m is an expansion of q(m):
// materialize it and check the oracle evaluation of q(m) on its canonical database.
TEST(ExpansionProperty, ExpansionsSatisfyBoundedQuery) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> queries{
      "?x -[a*]-> ?y, ?x -[b]-> ?y",
      "?x -[(ab)*]-> ?y, ?y -[a^<=2]-> ?z",
      "?x -[a+bc]-> ?y, ?y -[c*]-> ?x",
      "?x -[a*]-> ?y, ?y -[b*]-> ?z, ?z = ?w",
  };
  for (const auto& text : queries) {
    const auto q = parse_crpq(text);
    const std::size_t stars = ExpansionSpace(q).recursive.size();
    for (u64 m = 0; m <= 3; ++m) {
      ExponentDomain dom(stars);
      for (auto& d : dom)
        for (u64 e = 0; e <= m; ++e) d.push_back(e);
      for_each_expansion(q, dom, 1000, [&](const SuccinctCQ& l) {
        const auto g = graph_of(materialize(l));
        EXPECT_TRUE(eval_on_graph(bound_query(UCRPQ{{q}}, m), g)) << text << " / " << render(l);
        return true;
      });
    }
  }
}

// q(m) expansions are q(m') expansions for m <= m', and q(m) is below q.
TEST(ExpansionProperty, BoundQueryMonotone) {
  const auto q = UCRPQ{{parse_crpq("?x -[(ab)*]-> ?y, ?x -[b]-> ?y")}};
  for (u64 m = 0; m <= 3; ++m) {
    for (const auto& l : enumerate_expansions(bound_query(q, m).disjuncts[0], {}, 100)) {
      const auto g = graph_of(materialize(l));
      EXPECT_TRUE(eval_on_graph(bound_query(q, m + 1), g));
      EXPECT_TRUE(eval_on_graph(q, g));
    }
  }
}

TEST(Normalize, MergesAndDedupes) {
  SuccinctCQ raw;
  raw.variables = {"_m0_1", "x", "y"};
  raw.atoms = {{"x", {"a"}, 0, "_m0_1"}, {"_m0_1", {"b"}, 2, "y"}, {"x", {"b"}, 2, "y"}};
  std::vector<long> map;
  auto n = normalize(raw, &map);
  EXPECT_EQ(render(n), "?x -[b^2]-> ?y");
  EXPECT_EQ(map, (std::vector<long>{-1, 0, 0}));
}
