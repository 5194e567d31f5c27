#include <gtest/gtest.h>

#include <numeric>

#include "graded/constructions.hpp"
#include "graded/errors.hpp"
#include "graded/random.hpp"

using namespace graded;

namespace {

Expression c(const ChartPtr& ch, std::string_view n) { return Expression::coordinate(ch, n); }
Expression fx(const ChartPtr& ch, const char* n, int d = 0) { return Expression::function(ch, n, {c(ch, "x")}, {d}); }

ChartPtr line() { return ChartBuilder("M", 1).base("x").build(); }
ChartPtr plane() { return ChartBuilder("M", 1).base("x").base("y").build(); }

}  // namespace

// ---- affine data ------------------------------------------------------------------

TEST(Affine, SymmetricPartnerFilled) {
  ChartPtr M = plane();
  AffineConnectionData g = AffineConnectionData::make(M, {{{"x", "x", "y"}, c(M, "y")}});
  EXPECT_EQ(g.at(0, 1, 0), c(M, "y"));
  EXPECT_EQ(g.at(0, 0, 1), c(M, "y"));
  EXPECT_FALSE(g.is_zero());
}

TEST(Affine, AsymmetricPartnerRejected) {
  ChartPtr M = plane();
  EXPECT_THROW(AffineConnectionData::make(M, {{{"x", "x", "y"}, c(M, "y")}, {{"x", "y", "x"}, c(M, "x")}}),
               DomainError);
}

TEST(Riemann, ByHandOnPlane) {
  // only G^x_yy = x: R^x_yxy = d_x G^x_yy = 1
  ChartPtr M = plane();
  RiemannTensorData R = riemann(AffineConnectionData::make(M, {{{"x", "y", "y"}, c(M, "x")}}));
  EXPECT_EQ(R.at(0, 1, 0, 1), Expression::constant(M, Rational(1)));
  EXPECT_EQ(R.at(0, 1, 1, 0), Expression::constant(M, Rational(-1)));
  EXPECT_TRUE(R.at(1, 1, 0, 1).is_zero());
  EXPECT_TRUE(R.at(0, 0, 0, 1).is_zero());
}

TEST(Property, RiemannAntisymmetricInLastPair) {
  InstanceGenerator G(2);
  ChartPtr M = InstanceGenerator::base_chart(2);
  for (int t = 0; t < 5; ++t) {
    std::map<std::tuple<std::string, std::string, std::string>, Expression> e;
    for (const char* a : {"x1", "x2"})
      for (const char* b : {"x1", "x2"})
        for (const char* d : {"x1", "x2"})
          if (std::string(b) <= d) e[{a, b, d}] = G.base_polynomial(M, 2);
    RiemannTensorData R = riemann(AffineConnectionData::make(M, e));
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < 2; ++i)
          for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(R.at(a, b, i, j), -R.at(a, b, j, i));
  }
}

TEST(Affine, TransformFromFlatChart) {
  // x' = x + y^2: the inhomogeneous term d^2 x'/dy^2 = 2 sits in G'^x_yy
  ChartPtr M = plane();
  TransitionMap bc = TransitionMap::make("p", M, M, {{"x", c(M, "x") + c(M, "y").pow(2)}}, {{"x", c(M, "x") - c(M, "y").pow(2)}});
  AffineConnectionData g = transform_affine(AffineConnectionData::make(M, {}), bc);
  EXPECT_EQ(g.at(0, 1, 1), Expression::constant(M, Rational(2)));
  EXPECT_TRUE(g.at(0, 0, 1).is_zero());
  EXPECT_TRUE(g.at(1, 1, 1).is_zero());
}

TEST(Affine, TransformNeedsInverse) {
  ChartPtr M = plane();
  TransitionMap bc = TransitionMap::forward_only("p", M, M, {{"x", c(M, "x") + c(M, "y").pow(2)}});
  EXPECT_THROW(transform_affine(AffineConnectionData::make(M, {}), bc), IncompleteMap);
}

// ---- T^2 M --------------------------------------------------------------------------

TEST(T2M, SplittingShiftsSecondOrder) {
  ChartPtr M = line();
  TransitionMap phi = t2m_splitting(AffineConnectionData::make(M, {{{"x", "x", "x"}, fx(M, "G")}}));
  const ChartPtr& T = phi.source;
  EXPECT_EQ(phi.forward.image("x_2"), c(T, "x_2") - Rational(1, 2) * c(T, "x_1").pow(2) * fx(T, "G"));
  EXPECT_EQ(phi.forward.image("x_1"), c(T, "x_1"));
  EXPECT_TRUE(validate_transition(phi).passed());
}

TEST(T2M, CanonicalConnectionOnLineByHand) {
  // nabla(x_2) = dx (B x_2 + 1/2 x_1^2 (G' + G B))
  ChartPtr M = line();
  Algebroid A = tangent_algebroid({"x"});
  AffineConnectionData g = AffineConnectionData::make(M, {{{"x", "x", "x"}, fx(M, "G")}});
  T2MConstruction t = canonical_t2m_connection(g, {{{"x", "dx", "x"}, fx(A.chart(), "B")}}, A);
  EXPECT_TRUE(t.report.passed()) << t.report.str();
  const ChartPtr& P = t.nabla.product();
  Expression x1 = c(P, "x_1"), x2 = c(P, "x_2");
  EXPECT_EQ(t.nabla.gamma("dx", "x_1"), fx(P, "B") * x1);
  EXPECT_EQ(t.nabla.gamma("dx", "x_2"),
            fx(P, "B") * x2 + Rational(1, 2) * x1.pow(2) * (fx(P, "G", 1) + fx(P, "G") * fx(P, "B")));
  EXPECT_EQ(t.closed_form.field(), t.nabla.field());
}

TEST(T2M, SplittingWellDefinedUnderBaseChange) {
  ChartPtr M = plane();
  TransitionMap bc = TransitionMap::make("p", M, M, {{"x", c(M, "x") + c(M, "y").pow(2)}}, {{"x", c(M, "x") - c(M, "y").pow(2)}});
  Report r = t2m_splitting_well_defined(AffineConnectionData::formal(M), bc);
  for (const auto& ch : r.checks) {
    if (ch.name.find("Taylor") != std::string::npos) EXPECT_TRUE(ch.passed) << ch.name << " " << ch.detail;
  }
  EXPECT_TRUE(r.passed()) << r.str();
}

TEST(T2M, LeviCivitaClosedForms) {
  ChartPtr M = plane();
  Report r = t2m_levi_civita_report(AffineConnectionData::make(M, {{{"x", "x", "y"}, c(M, "y")}, {{"y", "x", "x"}, c(M, "x")}}));
  EXPECT_TRUE(r.passed()) << r.str();
}

TEST(T2M, GaugeEquivalenceOfTwoAffineConnections) {
  ChartPtr M = plane();
  Algebroid A = tangent_algebroid({"x", "y"});
  AffineConnectionData g1 = AffineConnectionData::make(M, {{{"x", "x", "y"}, c(M, "y")}});
  AffineConnectionData g2 = AffineConnectionData::make(M, {{{"x", "y", "y"}, Expression::constant(M, Rational(1))}});
  Report r = t2m_gauge_equivalence(g1, g2, levi_civita_block(g1, A), A);
  EXPECT_TRUE(r.passed()) << r.str();
}

TEST(T2M, FlatAffineGivesFlatConnection) {
  ChartPtr M = plane();
  Algebroid A = tangent_algebroid({"x", "y"});
  AffineConnectionData g = AffineConnectionData::make(M, {});
  T2MConstruction t = canonical_t2m_connection(g, levi_civita_block(g, A), A);
  EXPECT_TRUE(is_flat(t.nabla));
}

// ---- Poisson ------------------------------------------------------------------------

class PoissonSo3 : public ::testing::Test {
 protected:
  ChartPtr R3 = anticotangent_chart({"x", "y", "z"});
  ChartPtr E = ChartBuilder("E", 1).base("x").base("y").base("z").fiber("u", {1}).build();
  PoissonStructure P = PoissonStructure::make(
      R3, {{{"x", "y"}, c(R3, "z")}, {{"y", "z"}, c(R3, "x")}, {{"z", "x"}, c(R3, "y")}});
};

TEST_F(PoissonSo3, ContravariantConnection) {
  PoissonConnection pc = poisson_contravariant(P, E, {{{"x", "u"}, c(E, "y") * c(E, "u")}});
  EXPECT_TRUE(pc.report.passed()) << pc.report.str();
  EXPECT_TRUE(validate_connection_field(pc.cotangent.algebroid, E, pc.nabla.field()).passed());
}

TEST_F(PoissonSo3, ActionOfOneForm) {
  // x -> x + eps (z w_y - y w_z), u -> u + eps y u w_x
  PoissonConnection pc = poisson_contravariant(P, E, {{{"x", "u"}, c(E, "y") * c(E, "u")}});
  auto w = [&](const char* n) { return Expression::function(E, n, {c(E, "x"), c(E, "y"), c(E, "z")}); };
  PoissonAction a = poisson_action(pc, {{"x", w("w1")}, {"y", w("w2")}, {"z", w("w3")}});
  EXPECT_TRUE(a.report.passed()) << a.report.str();
  Expression eps = Expression::epsilon(E);
  EXPECT_EQ(a.action.image("x"), c(E, "x") + eps * (c(E, "z") * w("w2") - c(E, "y") * w("w3")));
  EXPECT_EQ(a.action.image("u"), c(E, "u") + eps * c(E, "y") * c(E, "u") * w("w1"));
}

TEST(Poisson, NonPoissonRejected) {
  ChartPtr R3 = anticotangent_chart({"x", "y", "z"});
  PoissonStructure P = PoissonStructure::make(R3, {{{"x", "y"}, c(R3, "z")}, {{"y", "z"}, c(R3, "y")}});
  EXPECT_THROW(cotangent_algebroid(P), PreconditionError);
}

// ---- T^k M ------------------------------------------------------------------------

TEST(Tkm, CompositionsCount) {
  EXPECT_EQ(compositions(1), (std::vector<std::vector<int>>{{1}}));
  EXPECT_EQ(compositions(3).size(), 4u);
  for (int l = 1; l <= 6; ++l) {
    auto cs = compositions(l);
    EXPECT_EQ(cs.size(), std::size_t{1} << (l - 1));
    for (const auto& v : cs) EXPECT_EQ(std::accumulate(v.begin(), v.end(), 0), l);
  }
}

TEST(Tkm, SymbolsWithFactorials) {
  Algebroid A = tangent_algebroid({"x"});
  TkmBlocks b;
  b[{2, "x", "dx", {{"x", 1}, {"x", 1}}}] = c(A.chart(), "x");
  b[{3, "x", "dx", {{"x", 1}, {"x", 2}}}] = Expression::constant(A.chart(), Rational(2));
  b[{3, "x", "dx", {{"x", 2}, {"x", 1}}}] = Expression::constant(A.chart(), Rational(2));
  Connection C = tkm_connection(A, 3, b);
  const ChartPtr& P = C.product();
  EXPECT_EQ(C.gamma("dx", "x_2"), Rational(1, 2) * c(P, "x") * c(P, "x_1").pow(2));
  EXPECT_EQ(C.gamma("dx", "x_3"), Rational(2) * c(P, "x_1") * c(P, "x_2"));
  EXPECT_TRUE(is_flat(C));
}

TEST(Tkm, AsymmetricBlocksRejected) {
  Algebroid A = tangent_algebroid({"x"});
  TkmBlocks b;
  b[{3, "x", "dx", {{"x", 1}, {"x", 2}}}] = Expression::constant(A.chart(), Rational(1));
  b[{3, "x", "dx", {{"x", 2}, {"x", 1}}}] = Expression::constant(A.chart(), Rational(2));
  EXPECT_THROW(tkm_connection(A, 3, b), DomainError);
}

TEST(Tkm, WeightMismatchRejected) {
  Algebroid A = tangent_algebroid({"x"});
  TkmBlocks b;
  b[{2, "x", "dx", {{"x", 1}}}] = Expression::constant(A.chart(), Rational(1));
  EXPECT_THROW(tkm_connection(A, 2, b), GradingError);
  TkmBlocks far;
  far[{4, "x", "dx", {{"x", 4}}}] = Expression::constant(A.chart(), Rational(1));
  EXPECT_THROW(tkm_connection(A, 3, far), RangeError);
}

TEST(Property, TkmTruncationTower) {
  InstanceGenerator G(5);
  Algebroid A = tangent_algebroid({"x1", "x2"});
  for (int t = 0; t < 3; ++t) {
    TkmBlocks b;
    for (const char* up : {"x1", "x2"}) {
      for (const char* i : {"dx1", "dx2"}) {
        b[{1, up, i, {{"x1", 1}}}] = G.base_polynomial(A.chart(), 1);
        b[{2, up, i, {{"x2", 2}}}] = G.base_polynomial(A.chart(), 1);
        b[{2, up, i, {{"x1", 1}, {"x2", 1}}}] = G.base_polynomial(A.chart(), 1);
      }
    }
    Connection C = tkm_connection(A, 2, b);
    EXPECT_TRUE(truncation_report(C).passed());
  }
}
