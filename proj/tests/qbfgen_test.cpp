#include <gtest/gtest.h>

#include <algorithm>

#include "crpq/boundedness.hpp"
#include "crpq/homomorphism.hpp"
#include "crpq/oracle.hpp"
#include "crpq/parser.hpp"
#include "crpq/qbfgen.hpp"

using namespace crpq;

namespace {

QBF one_clause(int a, int b, int c) {
  QBF phi;
  phi.n = 1;
  phi.l = 1;
  phi.clauses = {{a, b, c}};
  return phi;
}

// All 3-literal multisets over {x1, -x1, y1, -y1}.
std::vector<QBF> tiny_instances() {
  const std::vector<int> lits{1, -1, 2, -2};
  std::vector<QBF> out;
  for (std::size_t i = 0; i < lits.size(); ++i)
    for (std::size_t j = i; j < lits.size(); ++j)
      for (std::size_t k = j; k < lits.size(); ++k) out.push_back(one_clause(lits[i], lits[j], lits[k]));
  return out;
}

std::size_t count_atoms(const CRPQ& q, const std::string& source, const Symbol& label) {
  return std::count_if(q.atoms.begin(), q.atoms.end(), [&](const Atom& a) {
    return a.source == source && a.label.kind == RegexExpr::Kind::Letter && a.label.symbol == label;
  });
}

// Star exponents <= 1 on the left, s* unrolled at most twice on the right.
bool capped_containment(const QBF& phi) {
  const UCRPQ right = bound_query(UCRPQ{{build_q2(phi)}}, 2);
  bool all = true;
  const ExponentDomain dom(static_cast<std::size_t>(phi.n), {0, 1});
  for_each_expansion(build_q1(phi), dom, 100, [&](const SuccinctCQ& l) {
    all = all && materialized_expansion_contained(l, right, 2);
    return all;
  });
  return all;
}

}  // namespace

TEST(QbfText, ParseAndRender) {
  const auto phi = parse_qbf("c a comment\nforall 1..2\nexists 3\n1 -3 2 0\n-1 -2 3\n");
  EXPECT_EQ(phi.n, 2);
  EXPECT_EQ(phi.l, 1);
  ASSERT_EQ(phi.clauses.size(), 2u);
  EXPECT_EQ(phi.clauses[0], (std::array<int, 3>{1, -3, 2}));
  EXPECT_EQ(parse_qbf(render(phi)), phi);
  EXPECT_THROW(parse_qbf("forall 1\n1 2\n"), ParseError);
  EXPECT_THROW(parse_qbf("forall 1\n1 1 4\n"), InvalidArgument);
  EXPECT_THROW(parse_qbf("forall 2\n"), ParseError);
}

TEST(BuildQ1, Structure) {
  const auto q1 = build_q1(one_clause(1, 2, 2));
  // One universal branch under the root, with the a* tail.
  EXPECT_EQ(count_atoms(q1, "root", "x1"), 1u);
  const auto stars = std::count_if(q1.atoms.begin(), q1.atoms.end(), [](const Atom& a) { return is_recursive(a); });
  EXPECT_EQ(stars, 1);
  for (const char* v : {"e0", "e1", "root", "e3", "e4"}) {
    bool loop = false;
    for (const auto& a : q1.atoms) loop = loop || (a.source == v && a.target == v && a.label == RegexExpr::letter("s"));
    EXPECT_TRUE(loop) << v;
  }
  // q1 does not depend on the clauses.
  EXPECT_EQ(q1, build_q1(one_clause(-1, -1, -2)));
  const auto sigma = alphabet(q1);
  EXPECT_EQ(sigma, (std::set<Symbol>{"a", "b", "j", "s", "x1", "y1"}));
}

TEST(BuildQ2, OneGadgetPerClause) {
  QBF phi;
  phi.n = 5;
  phi.l = 4;
  phi.clauses = {{2, -5, -9}};
  const auto q2 = build_q2(phi);
  EXPECT_EQ(count_atoms(q2, "c1_1", "j"), 1u);
  EXPECT_EQ(count_atoms(q2, "c1_1", "x2"), 1u);
  EXPECT_EQ(count_atoms(q2, "c1_2", "x5"), 1u);
  EXPECT_EQ(count_atoms(q2, "c1_3", "y4"), 1u);
  EXPECT_EQ(count_atoms(q2, "c1_l3", "y4"), 1u);  // continues to the shared y_4_tf
  bool loop = false;
  for (const auto& a : q2.atoms) loop = loop || (a.target == "c1_1" && is_recursive(a));
  EXPECT_TRUE(loop);

  phi.clauses.push_back({1, 1, 1});
  const auto two = build_q2(phi);
  EXPECT_EQ(count_atoms(two, "c2_1", "j"), 1u);

  phi.clauses.clear();
  EXPECT_TRUE(build_q2(phi).atoms.empty());
  EXPECT_EQ(reduction(phi), build_q1(phi));
}

TEST(Reduction, FragmentCheck) {
  for (const auto& phi : tiny_instances()) {
    const auto q = reduction(phi);
    for (const auto& a : q.atoms) {
      ASSERT_EQ(a.kind, Atom::Kind::Edge);
      const auto c = classify(a.label);
      EXPECT_TRUE(c == FragmentClass::ASingleton || c == FragmentClass::AStar) << render(a.label);
    }
  }
}

TEST(Reduction, Q1IsBounded) {
  for (const auto& phi : {one_clause(1, 2, 2), one_clause(-1, -2, 2)}) {
    const auto r = is_bounded(UCRPQ{{build_q1(phi)}});
    EXPECT_EQ(r.verdict, Outcome::Bounded) << r.reason;
  }
}

// Forall-exists truth equals boundedness of q1 AND q2, and equals the capped
// containment of q1 in q2, on every one-clause instance with n = l = 1.
TEST(Reduction, VerdictMatchesSatisfiability) {
  int sat = 0;
  for (const auto& phi : tiny_instances()) {
    const bool expected = qbf_satisfiable(phi);
    sat += expected;
    EXPECT_EQ(capped_containment(phi), expected) << render(phi);
    const auto r = is_bounded(UCRPQ{{reduction(phi)}});
    ASSERT_NE(r.verdict, Outcome::Inconclusive) << render(phi) << r.reason;
    EXPECT_EQ(r.verdict == Outcome::Bounded, expected) << render(phi);
  }
  EXPECT_EQ(sat, 18);
}

TEST(Reduction, TwoUniversalVariables) {
  QBF phi;
  phi.n = 2;
  phi.l = 1;
  phi.clauses = {{1, 2, 1}};
  EXPECT_FALSE(qbf_satisfiable(phi));
  EXPECT_FALSE(capped_containment(phi));
  phi.clauses = {{1, -1, 3}};
  EXPECT_TRUE(qbf_satisfiable(phi));
  EXPECT_TRUE(capped_containment(phi));
}
