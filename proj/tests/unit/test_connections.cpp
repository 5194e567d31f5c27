#include <gtest/gtest.h>

#include "graded/connections.hpp"
#include "graded/errors.hpp"
#include "graded/random.hpp"

using namespace graded;

namespace {

Expression c(const ChartPtr& ch, std::string_view n) { return Expression::coordinate(ch, n); }
Expression k(const ChartPtr& ch, Rational v) { return Expression::constant(ch, v); }

ChartPtr degree2() { return ChartBuilder("F", 1).base("x").fiber("y", {1}).fiber("z", {2}).build(); }
ChartPtr line_bundle_on_plane() { return ChartBuilder("E", 1).base("x").base("y").fiber("u", {1}).build(); }

bool same(const ChristoffelData& a, const ChristoffelData& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [key, e] : a) {
    auto it = b.find(key);
    if (it == b.end() || !(it->second == e)) return false;
  }
  return true;
}

// A_a(x,y) u on the tangent algebroid of the plane
Connection electromagnetic() {
  Algebroid A = tangent_algebroid({"x", "y"});
  ChartPtr E = line_bundle_on_plane();
  ChartPtr P = product_chart(A.chart(), E);
  auto Aa = [&](const char* n) { return Expression::function(P, n, {c(P, "x"), c(P, "y")}); };
  return assemble(A, E, {{{"dx", "u"}, Aa("A1") * c(P, "u")}, {{"dy", "u"}, Aa("A2") * c(P, "u")}});
}

}  // namespace

TEST(Assemble, TrivialIsAlgebroidDifferential) {
  Algebroid A = tangent_algebroid({"x"});
  Connection C = trivial_connection(A, degree2());
  EXPECT_EQ(C.field(), C.base_field());
  EXPECT_TRUE(is_flat(C));
  EXPECT_TRUE(validate_connection_field(A, C.bundle(), C.field()).passed());
}

TEST(Assemble, WrongWeightRejected) {
  Algebroid A = tangent_algebroid({"x"});
  ChartPtr F = degree2();
  ChartPtr P = product_chart(A.chart(), F);
  EXPECT_THROW(assemble(A, F, {{{"dx", "y"}, c(P, "z")}}), GradingError);
  EXPECT_THROW(assemble(A, F, {{{"dx", "z"}, c(P, "y")}}), GradingError);
}

TEST(Assemble, UnverifiedAlgebroidRejected) {
  Algebroid g = lie_algebra({"e1", "e2"}, {{{"e1", "e2", "e2"}, Rational(1)}});
  ChartPtr F = ChartBuilder("V", 1).fiber("y", {1}).build();
  EXPECT_THROW(trivial_connection(g, F), PreconditionError);
  EXPECT_NO_THROW(trivial_connection(g.verify(), F));
}

TEST(Assemble, ReadBackFromField) {
  Connection C = electromagnetic();
  Connection D = connection_from_field(C.algebroid(), C.bundle(), C.field());
  EXPECT_TRUE(same(C.christoffels(), D.christoffels()));
  VectorField bad = C.field();
  bad.set("u", c(C.product(), "u"));
  EXPECT_THROW(connection_from_field(C.algebroid(), C.bundle(), bad), DomainError);
}

TEST(Curvature, OneDimensionalBaseIsFlat) {
  Algebroid A = tangent_algebroid({"x"});
  ChartPtr F = degree2();
  ChartPtr P = product_chart(A.chart(), F);
  Expression f = Expression::function(P, "f", {c(P, "x")});
  Connection C = assemble(A, F, {{{"dx", "y"}, f * c(P, "y")}, {{"dx", "z"}, f * c(P, "y").pow(2) + c(P, "z")}});
  EXPECT_TRUE(is_flat(C));
}

TEST(Curvature, ElectromagneticByHand) {
  // nabla^2 u = dx dy (d_x A2 - d_y A1) u
  Connection C = electromagnetic();
  const ChartPtr& P = C.product();
  auto d = [&](const char* n, int i, int j) { return Expression::function(P, n, {c(P, "x"), c(P, "y")}, {i, j}); };
  Expression expected = c(P, "dx") * c(P, "dy") * (d("A2", 1, 0) - d("A1", 0, 1)) * c(P, "u");
  EXPECT_EQ(curvature(C), VectorField::from_components(P, {{"u", expected}}));
  EXPECT_FALSE(is_flat(C));
}

TEST(Curvature, PureGaugePotentialIsFlat) {
  // A_a = d_a phi
  Algebroid A = tangent_algebroid({"x", "y"});
  ChartPtr E = line_bundle_on_plane();
  ChartPtr P = product_chart(A.chart(), E);
  Expression phi = c(P, "x").pow(2) * c(P, "y") + Rational(3) * c(P, "y");
  Connection C = assemble(A, E, {{{"dx", "u"}, phi.derivative("x") * c(P, "u")},
                                 {{"dy", "u"}, phi.derivative("y") * c(P, "u")}});
  EXPECT_TRUE(is_flat(C));
}

TEST(Curvature, ClosedFormAgreesWithBracket) {
  InstanceGenerator G(31);
  for (int t = 0; t < 8; ++t) {
    Algebroid A = Algebroid::make(G.valid_algebroid_spec(2, 2)).verify();
    ChartPtr F = G.bundle_chart(2, 2);
    Connection C = G.connection(A, F, 1);
    EXPECT_EQ(curvature(C), christoffel_curvature(C)) << C.field().str();
  }
}

TEST(Curvature, DisplayedIndexOrderOnStructureTerm) {
  // -Q_ij^k = Q_ji^k once Q is antisymmetrised, so both readings agree
  InstanceGenerator G(37);
  for (int t = 0; t < 6; ++t) {
    Algebroid A = Algebroid::make(G.valid_algebroid_spec(2, 2)).verify();
    Connection C = G.connection(A, G.bundle_chart(2, 2), 1);
    EXPECT_EQ(christoffel_curvature_literal(C), christoffel_curvature(C));
  }
}

TEST(Affine, DifferenceIsVerticalAndAddsBack) {
  InstanceGenerator G(4);
  Algebroid A = tangent_algebroid({"x1", "x2"});
  ChartPtr F = G.bundle_chart(2, 2);
  Connection a = G.connection(A, F, 1), b = G.connection(A, F, 1);
  VectorField V = difference(a, b);
  EXPECT_TRUE(V.restrict_to(CoordKind::base).is_zero());
  EXPECT_TRUE(V.restrict_to(CoordKind::algebroid_odd).is_zero());
  if (!V.is_zero()) {
    EXPECT_EQ(V.parity(), Parity::odd);
    EXPECT_EQ(V.weight(), (Multiweight{0, 1}));
  }
  EXPECT_EQ(add_vertical(b, V).field(), a.field());
  EXPECT_TRUE(difference(a, a).is_zero());
}

TEST(Affine, NonVerticalShiftRejected) {
  Connection C = electromagnetic();
  const ChartPtr& P = C.product();
  EXPECT_ANY_THROW(add_vertical(C, VectorField::from_components(P, {{"x", c(P, "dy")}})));
}

// ---- transformation laws --------------------------------------------------------

TEST(Transform, DegreeTwoLawsFormal) {
  // y' = y T(x), z' = z S(x) + 1/2 y^2 U(x) with the frame fixed
  Algebroid A = tangent_algebroid({"x"});
  ChartPtr F = degree2();
  ChartPtr P = product_chart(A.chart(), F);
  auto fx = [&](const char* n, int d = 0) { return Expression::function(P, n, {c(P, "x")}, {d}); };
  Expression y = c(P, "y"), z = c(P, "z");
  Expression g1 = fx("a") * y;
  Expression g2 = fx("b") * z + fx("e") * y.pow(2);
  Connection C = assemble(A, F, {{{"dx", "y"}, g1}, {{"dx", "z"}, g2}});

  FormalChange ch;
  ch.target_odd = {"dx"};
  ch.fiber_images = {{"y", y * fx("T")}, {"z", z * fx("S") + Rational(1, 2) * y.pow(2) * fx("U")}};
  ch.frame_inverse = {{{"dx", "dx"}, k(P, 1)}};
  ChristoffelData out = transform_christoffels_formal(C, ch);

  Expression law1 = g1 * fx("T") + y * fx("T", 1);
  Expression law2 = g2 * fx("S") + y * g1 * fx("U") + z * fx("S", 1) + Rational(1, 2) * y.pow(2) * fx("U", 1);
  EXPECT_EQ(out.at({"dx", "y"}), law1);
  EXPECT_EQ(out.at({"dx", "z"}), law2);
}

TEST(Transform, FrameChangeScalesByInverse) {
  // xi' = 2 xi gives T_{i'}^j = 1/2
  Connection C = electromagnetic();
  const ChartPtr& P = C.product();
  FormalChange ch;
  ch.target_odd = {"dx", "dy"};
  ch.fiber_images = {{"u", c(P, "u")}};
  ch.frame_inverse = {{{"dx", "dx"}, k(P, Rational(1, 2))}, {{"dy", "dy"}, k(P, Rational(1, 2))}};
  ChristoffelData out = transform_christoffels_formal(C, ch);
  EXPECT_EQ(out.at({"dx", "u"}), Rational(1, 2) * C.gamma("dx", "u"));
  EXPECT_EQ(out.at({"dy", "u"}), Rational(1, 2) * C.gamma("dy", "u"));
}

TEST(Transform, CheckedLawOnConstantLinearPart) {
  Algebroid A = tangent_algebroid({"x"});
  ChartPtr F = degree2();
  ChartPtr P = product_chart(A.chart(), F);
  Expression y = c(P, "y"), z = c(P, "z");
  Expression g = Expression::function(P, "g", {c(P, "x")});
  Connection C = assemble(A, F, {{{"dx", "y"}, g * y}, {{"dx", "z"}, z + y.pow(2)}});
  Expression fz = Rational(3) * z + Rational(1, 2) * y.pow(2) * g;
  Expression iz = Rational(1, 3) * (z - Rational(1, 8) * y.pow(2) * g);
  TransitionMap T = TransitionMap::make("lin", P, P, {{"y", Rational(2) * y}, {"z", fz}},
                                        {{"y", Rational(1, 2) * y}, {"z", iz}});
  ASSERT_TRUE(validate_transition(T).passed());
  EXPECT_TRUE(same(transform_christoffels(C, T), conjugated_christoffels(C, T)));
}

TEST(Transform, IdentityLeavesSymbolsAlone) {
  Connection C = electromagnetic();
  EXPECT_TRUE(same(transform_christoffels(C, TransitionMap::identity(C.product())), C.christoffels()));
}

TEST(Transform, InvalidTransitionRejected) {
  Connection C = electromagnetic();
  const ChartPtr& P = C.product();
  TransitionMap bad = TransitionMap::make("bad", P, P, {{"u", Rational(2) * c(P, "u")}}, {{"u", c(P, "u")}});
  EXPECT_THROW(transform_christoffels(C, bad), PreconditionError);
}

TEST(Property, LawEqualsConjugation) {
  InstanceGenerator G(12);
  for (int t = 0; t < 6; ++t) {
    Algebroid A = Algebroid::make(G.valid_algebroid_spec(2, 2)).verify();
    Connection C = G.connection(A, G.bundle_chart(2, 2), 1);
    TransitionMap T = G.triangular_transition(C.product(), C.product(), 3, 1);
    EXPECT_TRUE(same(transform_christoffels(C, T), conjugated_christoffels(C, T)));
  }
}

// ---- gauge ----------------------------------------------------------------------

TEST(Gauge, QuadraticShearOfTrivialConnection) {
  // nabla^phi(z) = phi^*(d_A(z - 1/2 y^2 g)) = -1/2 y^2 g' dx
  Algebroid A = tangent_algebroid({"x"});
  ChartPtr F = degree2();
  Connection C = trivial_connection(A, F);
  const ChartPtr& P = C.product();
  Expression half = Rational(1, 2) * c(P, "y").pow(2) * Expression::function(P, "g", {c(P, "x")});
  TransitionMap phi = TransitionMap::make("phi", P, P, {{"z", c(P, "z") + half}}, {{"z", c(P, "z") - half}});
  ASSERT_TRUE(validate_gauge(P, phi).passed());
  Connection moved = gauge_transform(C, phi);
  Expression expected = -Rational(1, 2) * c(P, "y").pow(2) * Expression::function(P, "g", {c(P, "x")}, {1});
  EXPECT_EQ(moved.gamma("dx", "z"), expected);
  EXPECT_TRUE(moved.gamma("dx", "y").is_zero());
  EXPECT_TRUE(is_flat(moved));
}

TEST(Gauge, BaseMotionIsNotGauge) {
  Connection C = electromagnetic();
  const ChartPtr& P = C.product();
  TransitionMap T = TransitionMap::make("shift", P, P, {{"x", c(P, "x") + c(P, "y")}}, {{"x", c(P, "x") - c(P, "y")}});
  EXPECT_FALSE(validate_gauge(P, T).passed());
}

TEST(Gauge, CompositionActsInOrder) {
  InstanceGenerator G(17);
  Algebroid A = tangent_algebroid({"x1", "x2"});
  Connection C = G.connection(A, G.bundle_chart(2, 2), 1);
  TransitionMap phi = G.gauge(C.product(), 2, 1), psi = G.gauge(C.product(), 2, 1);
  EXPECT_EQ(gauge_transform(gauge_transform(C, phi), psi).field(), gauge_transform(C, then(phi, psi)).field());
}

TEST(Property, FlatnessIsGaugeInvariant) {
  InstanceGenerator G(21);
  for (int t = 0; t < 6; ++t) {
    Algebroid A = Algebroid::make(G.valid_algebroid_spec(2, 2)).verify();
    Connection C = t % 2 ? G.connection(A, G.bundle_chart(2, 2), 1) : trivial_connection(A, G.bundle_chart(2, 2));
    TransitionMap g = G.gauge(C.product(), 3, 1);
    Connection moved = gauge_transform(C, g);
    EXPECT_TRUE(validate_connection_field(A, C.bundle(), moved.field()).passed());
    EXPECT_EQ(is_flat(moved), is_flat(C));
    EXPECT_EQ(curvature(moved), transport(curvature(C), g.inverse, g.forward));
  }
}

// ---- splittings -----------------------------------------------------------------

TEST(Split, NonlinearSymbolRejected) {
  Algebroid A = tangent_algebroid({"x"});
  ChartPtr F = degree2();
  ChartPtr P = product_chart(A.chart(), F);
  EXPECT_THROW(split_connection(A, F, {{{"dx", "z"}, c(P, "y").pow(2)}}), DomainError);
  EXPECT_NO_THROW(split_connection(A, F, {{{"dx", "z"}, c(P, "z")}, {{"dx", "y"}, c(P, "y")}}));
}

TEST(Split, BlocksAssembleLinearSymbols) {
  Algebroid A = tangent_algebroid({"x"});
  ChartPtr F = degree2();
  ChartPtr P = product_chart(A.chart(), F);
  ChristoffelData g = christoffels_from_blocks(P, {{{"y", "dx", "y"}, c(P, "x")}, {{"z", "dx", "z"}, k(P, 2)}});
  EXPECT_EQ(g.at({"dx", "y"}), c(P, "x") * c(P, "y"));
  EXPECT_EQ(g.at({"dx", "z"}), Rational(2) * c(P, "z"));
}

TEST(Split, UnsplitByIdentityIsUnchanged) {
  InstanceGenerator G(3);
  Algebroid A = tangent_algebroid({"x1", "x2"});
  ChartPtr F = G.bundle_chart(2, 2);
  Connection S = G.split_connection(A, F, 1);
  EXPECT_EQ(unsplit_via_splitting(S, TransitionMap::identity(F)).field(), S.field());
}

TEST(Property, SplittingsAreGaugeEquivalent) {
  InstanceGenerator G(44);
  for (int t = 0; t < 5; ++t) {
    Algebroid A = tangent_algebroid({"x1", "x2"});
    ChartPtr F = G.bundle_chart(2, 3, "F");
    ChartBuilder b("Fs", 1);
    for (const auto& z : F->coords()) b.add(z);
    ChartPtr split = b.build();
    Connection S = G.split_connection(A, split, 1);
    TransitionMap phi = G.splitting(F, split, 2, 1), psi = G.splitting(F, split, 2, 1);
    Connection np = unsplit_via_splitting(S, phi), nq = unsplit_via_splitting(S, psi);
    EXPECT_TRUE(validate_connection_field(A, F, np.field()).passed());
    TransitionMap g = splitting_gauge(np.product(), S.product(), phi, psi);
    EXPECT_TRUE(validate_gauge(np.product(), g).passed());
    EXPECT_EQ(gauge_transform(nq, g).field(), np.field());
  }
}

// ---- truncation -----------------------------------------------------------------

TEST(Truncation, ProjectionDropsHigherSymbols) {
  Algebroid A = tangent_algebroid({"x"});
  ChartPtr F = degree2();
  ChartPtr P = product_chart(A.chart(), F);
  Connection C = assemble(A, F, {{{"dx", "y"}, c(P, "x") * c(P, "y")}, {{"dx", "z"}, c(P, "y").pow(2)}});
  Connection T = project_truncation(C, 1);
  EXPECT_FALSE(T.bundle()->contains("z"));
  EXPECT_EQ(T.christoffels().size(), 1u);
  EXPECT_EQ(T.gamma("dx", "y").str(), "x*y");
  EXPECT_THROW(project_truncation(C, 3), RangeError);
}

TEST(Property, TruncationTower) {
  InstanceGenerator G(9);
  for (int t = 0; t < 5; ++t) {
    Algebroid A = Algebroid::make(G.valid_algebroid_spec(2, 2)).verify();
    Connection C = G.connection(A, G.bundle_chart(2, 3), 1);
    Report r = truncation_report(C);
    EXPECT_TRUE(r.passed()) << r.str();
  }
}

// ---- lifts, quasi-actions, morphisms ---------------------------------------------

TEST(Lift, HorizontalLiftOfElectromagnetic) {
  // H(d_x) = d/dx + A1 u d/du
  Connection C = electromagnetic();
  const Algebroid& A = C.algebroid();
  const ChartPtr& E = C.bundle();
  Section ex = make_section(A, {{"dx", k(A.chart(), 1)}});
  VectorField H = horizontal_lift(C, ex);
  Expression A1 = Expression::function(E, "A1", {c(E, "x"), c(E, "y")});
  EXPECT_EQ(H, VectorField::from_components(E, {{"x", k(E, 1)}, {"u", A1 * c(E, "u")}}));
}

TEST(Lift, CurvatureTensorOfElectromagnetic) {
  // R(d_x, d_y) u = -(d_x A2 - d_y A1) u
  Connection C = electromagnetic();
  const Algebroid& A = C.algebroid();
  const ChartPtr& E = C.bundle();
  Section ex = make_section(A, {{"dx", k(A.chart(), 1)}}), ey = make_section(A, {{"dy", k(A.chart(), 1)}});
  auto d = [&](const char* n, int i, int j) { return Expression::function(E, n, {c(E, "x"), c(E, "y")}, {i, j}); };
  VectorField expected = VectorField::from_components(E, {{"u", (d("A1", 0, 1) - d("A2", 1, 0)) * c(E, "u")}});
  EXPECT_EQ(curvature_tensor(C, ex, ey), expected);
  EXPECT_EQ(curvature_contraction(C, ex, ey), expected);
}

TEST(Property, LiftIdentities) {
  InstanceGenerator G(27);
  for (int t = 0; t < 8; ++t) {
    Algebroid A = Algebroid::make(G.valid_algebroid_spec(2, 2)).verify();
    Connection C = G.connection(A, G.bundle_chart(2, 2), 1);
    Section u = G.section(A, 1), v = G.section(A, 1);
    Expression f = G.base_polynomial(A.chart(), 1);
    VectorField H = horizontal_lift(C, u);
    Section fu = u;
    for (auto& x : fu.u) x = f * x;
    EXPECT_EQ(horizontal_lift(C, fu), f.embed(C.bundle()) * H);
    EXPECT_EQ(H.restrict_to(CoordKind::base), anchor_field(A, u).embed(C.bundle()));
    VectorField R = curvature_tensor(C, u, v);
    EXPECT_EQ(R, -curvature_tensor(C, v, u));
    EXPECT_EQ(R, curvature_contraction(C, u, v));
  }
}

TEST(QuasiAction, FlatConnectionActs) {
  Algebroid A = tangent_algebroid({"x", "y"});
  Connection C = trivial_connection(A, line_bundle_on_plane());
  Section u = make_section(A, {{"dx", c(A.chart(), "y")}}), v = make_section(A, {{"dy", k(A.chart(), 1)}});
  QuasiActionReport q = check_quasi_action(C, u, v, c(A.chart(), "x"));
  EXPECT_TRUE(q.conditions.passed()) << q.conditions.str();
  EXPECT_TRUE(q.action);
  EXPECT_TRUE(q.defect.is_zero());
}

TEST(QuasiAction, CurvedConnectionOnlyQuasi) {
  Connection C = electromagnetic();
  const Algebroid& A = C.algebroid();
  Section ex = make_section(A, {{"dx", k(A.chart(), 1)}}), ey = make_section(A, {{"dy", k(A.chart(), 1)}});
  QuasiActionReport q = check_quasi_action(C, ex, ey, c(A.chart(), "x"));
  EXPECT_TRUE(q.conditions.passed()) << q.conditions.str();
  EXPECT_FALSE(q.action);
  EXPECT_FALSE(q.defect.is_zero());
}

TEST(QuasiAction, EpsilonLinearImage) {
  Connection C = electromagnetic();
  const Algebroid& A = C.algebroid();
  Substitution a = quasi_action(C, make_section(A, {{"dx", k(A.chart(), 1)}}));
  const ChartPtr& E = C.bundle();
  Expression eps = Expression::epsilon(E);
  EXPECT_EQ(a.image("x"), c(E, "x") + eps);
  EXPECT_EQ(a.image("u"), c(E, "u") + eps * Expression::function(E, "A1", {c(E, "x"), c(E, "y")}) * c(E, "u"));
}

TEST(Morphism, HMorphismSquareCommutes) {
  InstanceGenerator G(6);
  for (int t = 0; t < 4; ++t) {
    Algebroid A = Algebroid::make(G.valid_algebroid_spec(2, 2)).verify();
    Report r = check_h_morphism(G.connection(A, G.bundle_chart(2, 2), 1));
    EXPECT_TRUE(r.passed()) << r.str();
  }
}

TEST(Morphism, GaugeElementIsConnectionMorphism) {
  InstanceGenerator G(8);
  Algebroid A = tangent_algebroid({"x1", "x2"});
  Connection C = G.connection(A, G.bundle_chart(2, 2), 1);
  TransitionMap g = G.gauge(C.product(), 2, 1);
  Connection moved = gauge_transform(C, g);
  EXPECT_TRUE(check_connection_morphism(TransitionMap::identity(C.product()), C, C).passed());
  Report r = check_connection_morphism(g, moved, C);
  EXPECT_TRUE(r.passed()) << r.str();
}

TEST(Morphism, MismatchedConnectionsFail) {
  Connection C = electromagnetic();
  Connection flat = trivial_connection(C.algebroid(), C.bundle());
  EXPECT_FALSE(check_connection_morphism(TransitionMap::identity(C.product()), C, flat).passed());
}
