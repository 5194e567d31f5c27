#include <gtest/gtest.h>

#include "graded/bundles.hpp"
#include "graded/errors.hpp"
#include "graded/random.hpp"

using namespace graded;

namespace {

ChartPtr degree2() { return ChartBuilder("F", 1).base("x").fiber("y", {1}).fiber("z", {2}).build(); }
ChartPtr plane() { return ChartBuilder("M", 1).base("x").base("y").build(); }

Expression c(const ChartPtr& ch, std::string_view n) { return Expression::coordinate(ch, n); }
Expression g_of_x(const ChartPtr& ch) { return Expression::function(ch, "g", {c(ch, "x")}); }

TransitionMap quadratic_shear(const ChartPtr& F) {
  Expression half = Rational(1, 2) * c(F, "y").pow(2) * g_of_x(F);
  return TransitionMap::make("shear", F, F, {{"z", c(F, "z") + half}}, {{"z", c(F, "z") - half}});
}

// x' = x + y^2, y' = y on the plane
TransitionMap parabolic(const ChartPtr& M) {
  return TransitionMap::make("parabolic", M, M, {{"x", c(M, "x") + c(M, "y").pow(2)}},
                             {{"x", c(M, "x") - c(M, "y").pow(2)}});
}

}  // namespace

TEST(ValidateTransition, QuadraticShearPasses) {
  Report r = validate_transition(quadratic_shear(degree2()));
  EXPECT_TRUE(r.passed()) << r.str();
}

TEST(ValidateTransition, WeightViolationFails) {
  auto F = degree2();
  TransitionMap bad = TransitionMap::make("bad", F, F, {}, {});
  bad.forward = Substitution::make(F, F, {{"z", c(F, "z") + c(F, "y")}}, false);
  Report r = validate_transition(bad);
  EXPECT_FALSE(r.passed());
  ASSERT_FALSE(r.failures().empty());
}

TEST(ValidateTransition, WrongInverseReportsResidual) {
  auto F = degree2();
  Expression half = Rational(1, 2) * c(F, "y").pow(2) * g_of_x(F);
  TransitionMap T = TransitionMap::make("off", F, F, {{"z", c(F, "z") + half}}, {{"z", c(F, "z") + half}});
  Report r = validate_transition(T);
  EXPECT_FALSE(r.passed());
  bool residual = false;
  for (const auto& f : r.failures()) residual = residual || f.detail.find("g(x)*y^2") != std::string::npos;
  EXPECT_TRUE(residual) << r.str();
}

TEST(ValidateTransition, IdentityPasses) {
  EXPECT_TRUE(validate_transition(TransitionMap::identity(degree2())).passed());
}

TEST(Homogeneity, ScalesByWeight) {
  auto F = degree2();
  auto Ft = with_parameters(F, {"t"});
  Expression t = c(Ft, "t");
  EXPECT_EQ(homogeneity_scale(c(F, "y") * c(F, "z"), 0), t.pow(3) * c(Ft, "y") * c(Ft, "z"));
  EXPECT_EQ(homogeneity_scale(g_of_x(F), 0), g_of_x(Ft));
  EXPECT_EQ(homogeneity_scale(c(F, "y") + c(F, "z"), 0), t * c(Ft, "y") + t.pow(2) * c(Ft, "z"));
}

TEST(Homogeneity, ActionStructureOnBigradedChart) {
  auto D = ChartBuilder("D", 2).base("x").fiber("y", {0, 1}).fiber("z", {1, 0}).fiber("w", {1, 1}).build();
  Report r = check_homogeneity_structure(D);
  EXPECT_TRUE(r.passed()) << r.str();
}

TEST(Homogeneity, RegularityOnlyInDegreeOne) {
  EXPECT_TRUE(regularity_test(ChartBuilder("E", 1).base("x").fiber("y", {1}).build()).passed());
  EXPECT_FALSE(regularity_test(degree2()).passed());
}

TEST(Truncate, DegreeTwoToOne) {
  auto F = degree2();
  ChartPtr F1 = truncate(F, 1);
  EXPECT_EQ(F1->size(), 2u);
  EXPECT_TRUE(F1->contains("y"));
  EXPECT_FALSE(F1->contains("z"));
  TransitionMap T1 = truncate(quadratic_shear(F), 1);
  EXPECT_EQ(T1.forward.image("y"), c(F1, "y"));
  EXPECT_TRUE(validate_transition(T1).passed());
}

TEST(Truncate, AtDegreeIsIdentity) {
  auto F = degree2();
  EXPECT_TRUE(truncate(F, 2)->same_layout(*F));
}

TEST(Truncate, BeyondDegreeThrows) { EXPECT_THROW(truncate(degree2(), 3), RangeError); }

TEST(AlphaLift, OneDimensional) {
  auto M = ChartBuilder("M", 1).base("x").build();
  auto T2 = higher_tangent_chart(M, 2);
  Expression f = Expression::function(M, "f", {c(M, "x")});
  auto fk = [&](int d) { return Expression::function(T2, "f", {c(T2, "x")}, {d}); };
  EXPECT_EQ(alpha_lift(f, 1, T2), c(T2, "x_1") * fk(1));
  EXPECT_EQ(alpha_lift(f, 2, T2), c(T2, "x_2") * fk(1) + c(T2, "x_1").pow(2) * fk(2));
  EXPECT_EQ(alpha_lift(f, 0, T2), fk(0));
  EXPECT_TRUE(alpha_lift(Expression::constant(M, Rational(5)), 1, T2).is_zero());
  EXPECT_THROW(alpha_lift(f, 3, T2), RangeError);
}

TEST(AlphaLift, LeibnizForFirstLift) {
  auto M = plane();
  auto T1 = higher_tangent_chart(M, 1);
  InstanceGenerator G(3);
  for (int t = 0; t < 20; ++t) {
    Expression f = G.base_polynomial(M, 3), g = G.base_polynomial(M, 3);
    EXPECT_EQ(alpha_lift(f * g, 1, T1), alpha_lift(f, 1, T1) * alpha_lift(g, 0, T1) + alpha_lift(f, 0, T1) * alpha_lift(g, 1, T1));
  }
}

TEST(HigherTangent, FaaDiBrunoOnParabolicChange) {
  auto M = plane();
  TransitionMap T = higher_tangent_transition(parabolic(M), 2);
  const ChartPtr& S = T.source;
  auto v = [&](const char* n) { return c(S, n); };
  EXPECT_EQ(T.forward.image("x_1"), v("x_1") + Rational(2) * v("y") * v("y_1"));
  EXPECT_EQ(T.forward.image("x_2"), v("x_2") + Rational(2) * v("y") * v("y_2") + Rational(2) * v("y_1").pow(2));
  EXPECT_EQ(T.forward.image("y_2"), v("y_2"));
  EXPECT_TRUE(validate_transition(T).passed());
}

TEST(HigherTangent, IdentityLiftsToIdentity) {
  auto M = plane();
  TransitionMap T = higher_tangent_transition(TransitionMap::identity(M), 3);
  for (const auto& z : T.target->coords()) EXPECT_EQ(T.forward.image(z.name), c(T.source, z.name));
}

TEST(HigherTangent, MissingInverseThrows) {
  auto M = plane();
  TransitionMap f = TransitionMap::forward_only("f", M, M, {{"x", c(M, "x") + c(M, "y").pow(2)}});
  EXPECT_THROW(higher_tangent_transition(f, 2), IncompleteMap);
}

TEST(HigherTangent, CocycleOnRandomChanges) {
  auto M = plane();
  InstanceGenerator G(8);
  for (int k = 2; k <= 3; ++k) {
    for (int t = 0; t < 5; ++t) {
      TransitionMap a = G.triangular_transition(M, M, 2, 2);
      TransitionMap b = G.triangular_transition(M, M, 2, 2);
      TransitionMap lhs = higher_tangent_transition(compose(a, b), k);
      TransitionMap rhs = compose(higher_tangent_transition(a, k), higher_tangent_transition(b, k));
      for (const auto& z : lhs.target->coords()) {
        EXPECT_EQ(lhs.forward.image(z.name), rhs.forward.image(z.name).embed(lhs.source)) << z.name;
      }
    }
  }
}

TEST(Property, TruncationInheritsValidity) {
  InstanceGenerator G(19);
  for (int t = 0; t < 15; ++t) {
    ChartPtr F = G.bundle_chart(2, 3);
    TransitionMap T = G.triangular_transition(F, F, 4, 1);
    ASSERT_TRUE(validate_transition(T).passed());
    for (int l = 1; l < 3; ++l) EXPECT_TRUE(validate_transition(truncate(T, l)).passed()) << "l=" << l;
  }
}

TEST(Property, HomogeneityComposition) {
  InstanceGenerator G(23);
  for (int t = 0; t < 10; ++t) EXPECT_TRUE(check_homogeneity_structure(G.bundle_chart(2, 3)).passed());
}
