#include <gtest/gtest.h>

#include <random>

#include "crpq/parser.hpp"
#include "crpq/syntax.hpp"

using namespace crpq;

TEST(Parse, StarAndLetter) {
  auto q = parse_ucrpq("?x -[a*]-> ?y, ?x -[b]-> ?y");
  ASSERT_EQ(q.disjuncts.size(), 1u);
  const auto& atoms = q.disjuncts[0].atoms;
  ASSERT_EQ(atoms.size(), 2u);
  EXPECT_EQ(atoms[0].label, RegexExpr::star({"a"}));
  EXPECT_EQ(atoms[1].label, RegexExpr::letter("b"));
  EXPECT_EQ(atoms[0].source, "x");
  EXPECT_EQ(atoms[0].target, "y");
}

TEST(Parse, UnionOfQueriesWithPower) {
  auto q = parse_ucrpq("?x -[(ab)^11]-> ?y | ?x -[eps]-> ?y");
  ASSERT_EQ(q.disjuncts.size(), 2u);
  EXPECT_EQ(q.disjuncts[0].atoms[0].label, RegexExpr::power({"a", "b"}, 11));
  EXPECT_EQ(q.disjuncts[1].atoms[0].label, RegexExpr::epsilon());
}

TEST(Parse, StarOverNonWordIsRejected) {
  try {
    parse_ucrpq("?x -[(a+b)*]-> ?y");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("star over non-word"), std::string::npos);
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(Parse, ErrorsCarryLineAndColumn) {
  try {
    parse_ucrpq("?x -[a]-> ?y,\n  ?y -[b]- ?z");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 1u);
  }
}

TEST(Parse, ChainsAndReversedEdges) {
  auto q = parse_crpq("?y <-[a]- ?x -[a*]-> ?z -[b]-> ?w");
  ASSERT_EQ(q.atoms.size(), 3u);
  EXPECT_EQ(render(q), "?x -[a]-> ?y, ?x -[a*]-> ?z, ?z -[b]-> ?w");
}

TEST(Parse, SymbolsAndQuoting) {
  EXPECT_EQ(parse_word("ab"), (Word{"a", "b"}));
  EXPECT_EQ(parse_word("x1y_2"), (Word{"x1", "y_2"}));
  EXPECT_EQ(parse_word("'long'a"), (Word{"long", "a"}));
  EXPECT_EQ(parse_word("eps"), Word{});
  EXPECT_EQ(parse_regex("a^<=3"), RegexExpr::power_le({"a"}, 3));
}

TEST(Parse, EqualityAtoms) {
  auto q = parse_crpq("?x -[a]-> ?y, ?x = ?y");
  ASSERT_EQ(q.atoms.size(), 2u);
  EXPECT_EQ(q.atoms[1].kind, Atom::Kind::Equality);
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(RegexExpr::letter("a")), FragmentClass::ASingleton);
  EXPECT_EQ(classify(RegexExpr::power_le({"a", "b"}, 5)), FragmentClass::SSF);
  EXPECT_EQ(classify(RegexExpr::star({"a", "b", "a"})), FragmentClass::WStar);
  EXPECT_EQ(classify(RegexExpr::star({"a"})), FragmentClass::AStar);
  EXPECT_EQ(classify(parse_regex("ab")), FragmentClass::WSingleton);
  EXPECT_EQ(classify(parse_regex("a+b")), FragmentClass::SF);
  EXPECT_EQ(classify(parse_regex("a(bc)^4")), FragmentClass::SSF);
  EXPECT_EQ(classify(parse_regex("ab*")), FragmentClass::Unsupported);
}

TEST(Classify, LetterSitsBelowEveryStarFreeComposite) {
  const auto letter = classify(RegexExpr::letter("a"));
  for (const char* text : {"ab", "a+b", "a(b)^3", "(ab)^<=2+a"}) {
    EXPECT_TRUE(class_leq(letter, classify(parse_regex(text)))) << text;
  }
  EXPECT_TRUE(class_leq(FragmentClass::AStar, FragmentClass::WStar));
  EXPECT_FALSE(class_leq(FragmentClass::SSF, FragmentClass::SF));
}

TEST(Size, Examples) {
  EXPECT_EQ(size(parse_ucrpq("?x -[(ab)^8]-> ?y")), 5u);
  EXPECT_EQ(size(parse_ucrpq("?x -[a*]-> ?y")), 1u);
  EXPECT_EQ(size(parse_ucrpq("?x -[a]-> ?y")), 1u);
  EXPECT_EQ(size(parse_regex("a^0")), 2u);
  EXPECT_EQ(size(parse_regex("a^1")), 2u);
  EXPECT_EQ(size(parse_regex("a^9")), 5u);
}

TEST(Collapse, MergesEqualityClasses) {
  auto q = parse_crpq("?x -[k]-> ?y, ?y -[l]-> ?z, ?x = ?y");
  EXPECT_EQ(render(collapse(q)), "?x -[k]-> ?x, ?x -[l]-> ?z");
}

TEST(Collapse, TransitiveEqualities) {
  auto q = parse_crpq("?x = ?y, ?y = ?z, ?x -[a]-> ?z");
  EXPECT_EQ(render(collapse(q)), "?x -[a]-> ?x");
}

TEST(Collapse, NoEqualitiesIsIdentity) {
  auto q = parse_crpq("?x -[a*]-> ?y, ?y -[b]-> ?z");
  EXPECT_EQ(collapse(q), q);
}

TEST(ReduceFreeVars, AddsTaggedSelfLoops) {
  auto q = parse_ucrpq("?x -[a*]-> ?y");
  auto r = reduce_free_vars(q, {"x"}, {"ax"});
  EXPECT_EQ(render(r), "?x -[a*]-> ?y, ?x -['ax']-> ?x");
  EXPECT_EQ(reduce_free_vars(q, {}), q);
  auto two = reduce_free_vars(q, {"x", "y"});
  auto sigma = alphabet(two);
  EXPECT_EQ(sigma.size(), 3u);
  EXPECT_THROW(reduce_free_vars(q, {"x"}, {"a"}), InvalidArgument);
}

// Random expressions in the supported grammar for round-trip checks.
RegexExpr random_regex(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 6 : 3);
  const std::vector<Symbol> letters{"a", "b", "e", "p", "s", "x1", "long"};
  auto word = [&] {
    Word w;
    const int len = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < len; ++i) w.push_back(letters[rng() % letters.size()]);
    return w;
  };
  switch (pick(rng)) {
    case 0: return RegexExpr::letter(letters[rng() % letters.size()]);
    case 1: return RegexExpr::power(word(), rng() % 40);
    case 2: return RegexExpr::power_le(word(), rng() % 40);
    case 3: return rng() % 4 == 0 ? RegexExpr::epsilon() : RegexExpr::star(word());
    case 4:
    case 5: {
      std::vector<RegexExpr> parts;
      const int n = 2 + static_cast<int>(rng() % 2);
      for (int i = 0; i < n; ++i) parts.push_back(random_regex(rng, depth - 1));
      // Flatten so that the tree is in parser normal form.
      std::vector<RegexExpr> flat;
      for (auto& p : parts) {
        if (p.kind == RegexExpr::Kind::Concat)
          flat.insert(flat.end(), p.children.begin(), p.children.end());
        else
          flat.push_back(p);
      }
      // Adjacent letters inside a concatenation stay separate Letter nodes.
      return RegexExpr::concat(flat);
    }
    default: {
      std::vector<RegexExpr> parts;
      for (int i = 0; i < 2; ++i) {
        auto p = random_regex(rng, depth - 1);
        if (p.kind == RegexExpr::Kind::Union)
          parts.insert(parts.end(), p.children.begin(), p.children.end());
        else
          parts.push_back(p);
      }
      return RegexExpr::alt(parts);
    }
  }
}

TEST(RoundTrip, RandomQueries) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    UCRPQ q;
    const int disjuncts = 1 + static_cast<int>(rng() % 2);
    for (int d = 0; d < disjuncts; ++d) {
      CRPQ c;
      const int atoms = 1 + static_cast<int>(rng() % 3);
      for (int i = 0; i < atoms; ++i) {
        const std::string x = "v" + std::to_string(rng() % 3), y = "v" + std::to_string(rng() % 3);
        if (rng() % 8 == 0)
          c.atoms.push_back(Atom::equality(x, y));
        else
          c.atoms.push_back(Atom::edge(x, random_regex(rng, 2), y));
      }
      q.disjuncts.push_back(c);
    }
    const auto text = render(q);
    ASSERT_EQ(parse_ucrpq(text), q) << text;
  }
}

TEST(CollapseProperty, Idempotent) {
  for (const char* text : {"?x = ?y, ?y -[a]-> ?z, ?z = ?w", "?a -[b]-> ?b, ?b = ?a", "?x = ?x"}) {
    auto once = collapse(parse_crpq(text));
    EXPECT_EQ(collapse(once), once) << text;
  }
}
