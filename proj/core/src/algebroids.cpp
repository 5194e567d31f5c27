#include "graded/algebroids.hpp"

#include <set>

#include "graded/errors.hpp"

namespace graded {

namespace {

std::string residual_text(const Expression& e) { return e.is_zero() ? std::string() : "residual " + e.str(); }

void require_base(const Expression& e, const std::string& what) {
  if (!e.is_base()) throw DomainError(what + " must be a base function, got " + e.str());
}

const std::string& name_of(const ChartPtr& c, std::size_t rank) { return c->at(rank).name; }

std::pair<Expression, Expression> split_parity(const Expression& e) {
  std::vector<Term> even, odd;
  for (const auto& t : e.terms()) {
    (is_odd(grade_of_monomial(*e.chart(), t.mono).parity) ? odd : even).push_back(t);
  }
  return {Expression::from_terms(e.chart(), std::move(even)), Expression::from_terms(e.chart(), std::move(odd))};
}

}  // namespace

ChartPtr algebroid_chart(const std::string& name, const std::vector<std::string>& base,
                         const std::vector<std::string>& odd) {
  ChartBuilder b(name, 1);
  for (const auto& x : base) b.base(x);
  for (const auto& xi : odd) b.odd(xi);
  return b.build();
}

Algebroid Algebroid::make(const AlgebroidSpec& spec) {
  Algebroid A;
  A.chart_ = spec.chart;
  if (!spec.chart) throw DomainError("algebroid without a chart");
  if (spec.chart->gradings() != 1) throw GradingError("an algebroid chart carries a single grading");
  for (std::size_t r = 0; r < spec.chart->size(); ++r) {
    auto kind = spec.chart->at(r).kind;
    if (kind == CoordKind::base) A.base_.push_back(r);
    else if (kind == CoordKind::algebroid_odd) A.odd_.push_back(r);
    else throw GradingError("coordinate " + name_of(spec.chart, r) + " is neither base nor odd of weight one");
  }
  const auto n = A.odd_.size();
  const auto m = A.base_.size();
  Expression zero(spec.chart);
  A.anchor_.assign(n, std::vector<Expression>(m, zero));
  A.structure_.assign(n, std::vector<std::vector<Expression>>(n, std::vector<Expression>(n, zero)));

  auto odd_index = [&](const std::string& s) {
    for (std::size_t i = 0; i < n; ++i) {
      if (name_of(spec.chart, A.odd_[i]) == s) return i;
    }
    throw DomainError("'" + s + "' is not an odd coordinate of " + spec.chart->name());
  };
  auto base_index = [&](const std::string& s) {
    for (std::size_t a = 0; a < m; ++a) {
      if (name_of(spec.chart, A.base_[a]) == s) return a;
    }
    throw DomainError("'" + s + "' is not a base coordinate of " + spec.chart->name());
  };

  for (const auto& [key, e] : spec.anchor) {
    require_base(e, "Q[" + key.first + "][" + key.second + "]");
    A.anchor_[odd_index(key.first)][base_index(key.second)] = e.is_zero() ? zero : e;
  }
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> given;
  for (const auto& [key, e] : spec.structure) {
    const auto& [si, sj, sk] = key;
    require_base(e, "Q[" + si + "][" + sj + "][" + sk + "]");
    auto i = odd_index(si), j = odd_index(sj), k = odd_index(sk);
    Expression v = e.is_zero() ? zero : e;
    if (i == j) {
      if (!v.is_zero()) throw DomainError("Q[" + si + "][" + si + "][" + sk + "] must vanish by antisymmetry");
      continue;
    }
    if (given.count({j, i, k})) {
      Expression sum = A.structure_[j][i][k] + v;
      if (!sum.is_zero()) {
        throw DomainError("structure functions not antisymmetric: Q[" + si + "][" + sj + "][" + sk +
                          "] + Q[" + sj + "][" + si + "][" + sk + "] = " + sum.str());
      }
      continue;
    }
    given.insert({i, j, k});
    A.structure_[i][j][k] = v;
    A.structure_[j][i][k] = -v;
  }
  A.d_ = build_differential(A);
  return A;
}

VectorField build_differential(const Algebroid& A) {
  const auto& c = A.chart();
  VectorField d(c);
  for (std::size_t a = 0; a < A.base_dim(); ++a) {
    Expression comp(c);
    for (std::size_t i = 0; i < A.rank(); ++i) comp += Expression::coordinate(c, A.odd(i)) * A.anchor(i, a);
    d.set(A.base(a), comp);
  }
  const Rational half(1, 2);
  for (std::size_t k = 0; k < A.rank(); ++k) {
    Expression comp(c);
    for (std::size_t i = 0; i < A.rank(); ++i) {
      for (std::size_t j = 0; j < A.rank(); ++j) {
        if (A.structure(j, i, k).is_zero()) continue;
        comp += half * (Expression::coordinate(c, A.odd(i)) * Expression::coordinate(c, A.odd(j)) * A.structure(j, i, k));
      }
    }
    d.set(A.odd(k), comp);
  }
  return d;
}

Algebroid Algebroid::verify() const {
  Report r = check_structure(*this);
  if (!r.passed()) throw PreconditionError("algebroid on " + chart_->name() + " failed verification:\n" + r.str());
  Algebroid copy = *this;
  copy.verified_ = true;
  return copy;
}

void Algebroid::require_verified(const std::string& what) const {
  if (!verified_) throw PreconditionError(what + " requires a verified algebroid (run check_structure first)");
}

AlgebroidSpec Algebroid::spec() const {
  AlgebroidSpec s;
  s.chart = chart_;
  for (std::size_t i = 0; i < rank(); ++i) {
    for (std::size_t a = 0; a < base_dim(); ++a) {
      if (!anchor(i, a).is_zero()) s.anchor.emplace(std::pair{name_of(chart_, odd(i)), name_of(chart_, base(a))}, anchor(i, a));
    }
    for (std::size_t j = i + 1; j < rank(); ++j) {
      for (std::size_t k = 0; k < rank(); ++k) {
        if (!structure(i, j, k).is_zero()) {
          s.structure.emplace(std::tuple{name_of(chart_, odd(i)), name_of(chart_, odd(j)), name_of(chart_, odd(k))},
                              structure(i, j, k));
        }
      }
    }
  }
  return s;
}

StructureResiduals structure_residuals(const Algebroid& A) {
  StructureResiduals R;
  const auto& c = A.chart();
  const auto n = A.rank();
  const auto m = A.base_dim();
  auto rho = [&](std::size_t i, const Expression& f) {
    Expression r(c);
    for (std::size_t a = 0; a < m; ++a) {
      if (!A.anchor(i, a).is_zero()) r += A.anchor(i, a) * f.derivative(A.base(a));
    }
    return r;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t b = 0; b < m; ++b) {
        Expression lhs(c);
        for (std::size_t k = 0; k < n; ++k) lhs += A.structure(j, i, k) * A.anchor(k, b);
        Expression rhs = rho(j, A.anchor(i, b)) - rho(i, A.anchor(j, b));
        R.anchor_equation.emplace_back(
            "(" + name_of(c, A.odd(i)) + "," + name_of(c, A.odd(j)) + ";" + name_of(c, A.base(b)) + ")", lhs - rhs);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
          Expression fixed(c), literal(c);
          const std::size_t cyc[3][3] = {{i, j, k}, {j, k, i}, {k, i, j}};
          for (const auto& t : cyc) {
            Expression d = rho(t[0], A.structure(t[1], t[2], l));
            Expression q(c);
            for (std::size_t mm = 0; mm < n; ++mm) q += A.structure(t[0], t[1], mm) * A.structure(mm, t[2], l);
            fixed += d - q;
            literal += d + q;
          }
          std::string label = "(" + name_of(c, A.odd(i)) + "," + name_of(c, A.odd(j)) + "," + name_of(c, A.odd(k)) +
                              ";" + name_of(c, A.odd(l)) + ")";
          R.jacobi_equation.emplace_back(label, fixed);
          R.jacobi_literal.emplace_back(label, literal);
        }
      }
    }
  }
  return R;
}

namespace {

std::pair<bool, std::string> first_nonzero(const std::vector<std::pair<std::string, Expression>>& rs) {
  for (const auto& [label, e] : rs) {
    if (!e.is_zero()) return {false, label + " " + residual_text(e)};
  }
  return {true, {}};
}

}  // namespace

Report check_structure(const Algebroid& A) {
  Report r;
  r.title = "algebroid structure on " + A.chart()->name();
  const auto& d = A.differential();
  auto p = d.parity();
  auto w = d.weight();
  r.add("d_A is odd", d.is_zero() || (p && *p == Parity::odd));
  r.add("d_A has weight one", d.is_zero() || (w && *w == Multiweight{1}));

  StructureResiduals R = structure_residuals(A);
  auto [anchor_ok, anchor_detail] = first_nonzero(R.anchor_equation);
  auto [jacobi_ok, jacobi_detail] = first_nonzero(R.jacobi_equation);
  r.add("anchor structure equation", anchor_ok, anchor_detail);
  r.add("cyclic structure equation", jacobi_ok, jacobi_detail);

  VectorField sq = Rational(1, 2) * bracket(d, d);
  bool square_ok = sq.is_zero();
  r.add("d_A^2 = 0", square_ok, square_ok ? std::string() : "d_A^2 = " + sq.str());
  r.add("structure equations agree with d_A^2 = 0", (anchor_ok && jacobi_ok) == square_ok);

  auto [literal_ok, literal_detail] = first_nonzero(R.jacobi_literal);
  r.note("cyclic equation with +Q_ij^m Q_mk^l (literal sign)", literal_ok == jacobi_ok,
         literal_ok == jacobi_ok ? std::string("same verdict") : "verdict differs; " + literal_detail);
  return r;
}

Section make_section(const Algebroid& A, const std::map<std::string, Expression>& comps) {
  Section s;
  s.u.assign(A.rank(), Expression(A.chart()));
  for (const auto& [name, e] : comps) {
    require_base(e, "section component " + name);
    bool found = false;
    for (std::size_t i = 0; i < A.rank(); ++i) {
      if (name_of(A.chart(), A.odd(i)) == name) {
        s.u[i] = e.is_zero() ? Expression(A.chart()) : e;
        found = true;
      }
    }
    if (!found) throw DomainError("'" + name + "' is not an odd coordinate of the algebroid");
  }
  return s;
}

VectorField iota(const Algebroid& A, const Section& u) {
  VectorField X(A.chart());
  for (std::size_t i = 0; i < A.rank(); ++i) X.set(A.odd(i), u.u.at(i));
  return X;
}

Section section_from_field(const Algebroid& A, const VectorField& X) {
  Section s;
  s.u.assign(A.rank(), Expression(A.chart()));
  for (const auto& [rank, e] : X.components()) {
    bool is_odd_slot = false;
    for (std::size_t i = 0; i < A.rank(); ++i) {
      if (A.odd(i) == rank) {
        if (!e.is_base()) throw ConsistencyError("component along " + name_of(A.chart(), rank) + " depends on odd data: " + e.str());
        s.u[i] = e;
        is_odd_slot = true;
      }
    }
    if (!is_odd_slot) throw ConsistencyError("field has a component along " + name_of(A.chart(), rank));
  }
  return s;
}

Section closed_form_bracket(const Algebroid& A, const Section& u, const Section& v) {
  Section s;
  const auto& c = A.chart();
  s.u.assign(A.rank(), Expression(c));
  for (std::size_t k = 0; k < A.rank(); ++k) {
    Expression e(c);
    for (std::size_t i = 0; i < A.rank(); ++i) {
      for (std::size_t a = 0; a < A.base_dim(); ++a) {
        if (A.anchor(i, a).is_zero()) continue;
        e += u.u[i] * A.anchor(i, a) * v.u[k].derivative(A.base(a));
        e -= v.u[i] * A.anchor(i, a) * u.u[k].derivative(A.base(a));
      }
      for (std::size_t j = 0; j < A.rank(); ++j) e -= u.u[i] * v.u[j] * A.structure(j, i, k);
    }
    s.u[k] = e;
  }
  return s;
}

Section derived_bracket(const Algebroid& A, const Section& u, const Section& v) {
  A.require_verified("derived_bracket");
  VectorField X = bracket(bracket(A.differential(), iota(A, u)), iota(A, v));
  Section s = section_from_field(A, X);
  Section closed = closed_form_bracket(A, u, v);
  for (std::size_t k = 0; k < A.rank(); ++k) {
    if (!(s.u[k] == closed.u[k])) {
      throw ConsistencyError("derived bracket disagrees with the closed form along " + name_of(A.chart(), A.odd(k)) +
                             ": " + s.u[k].str() + " vs " + closed.u[k].str());
    }
  }
  return s;
}

VectorField anchor_field(const Algebroid& A, const Section& u) {
  VectorField X(A.chart());
  for (std::size_t a = 0; a < A.base_dim(); ++a) {
    Expression e(A.chart());
    for (std::size_t i = 0; i < A.rank(); ++i) e += u.u[i] * A.anchor(i, a);
    X.set(A.base(a), e);
  }
  return X;
}

Expression anchor(const Algebroid& A, const Section& u, const Expression& f) {
  A.require_verified("anchor");
  require_base(f, "anchor argument");
  Expression via_bracket = bracket(A.differential(), iota(A, u)).apply(f);
  Expression closed = anchor_field(A, u).apply(f);
  if (!(via_bracket == closed)) {
    throw ConsistencyError("anchor via [d_A, iota_u] disagrees with u^i Q_i^a d_a f: " + via_bracket.str() + " vs " +
                           closed.str());
  }
  return closed;
}

std::string differential_name(const std::string& coordinate) { return "d" + coordinate; }

ChartPtr antitangent_chart(const ChartPtr& chart, const std::string& name) {
  ChartBuilder b(name.empty() ? "PiT" + chart->name() : name, 1);
  for (auto r : chart->indices_of(CoordKind::base)) b.base(chart->at(r).name);
  for (auto r : chart->indices_of(CoordKind::base)) b.odd(differential_name(chart->at(r).name));
  return b.build();
}

Substitution anchor_morphism(const Algebroid& A, const ChartPtr& antitangent) {
  std::map<std::string, Expression> m;
  for (std::size_t a = 0; a < A.base_dim(); ++a) {
    const auto& x = name_of(A.chart(), A.base(a));
    m.emplace(x, Expression::coordinate(A.chart(), A.base(a)));
    Expression e(A.chart());
    for (std::size_t i = 0; i < A.rank(); ++i) e += Expression::coordinate(A.chart(), A.odd(i)) * A.anchor(i, a);
    m.emplace(differential_name(x), e);
  }
  return Substitution::make(antitangent, A.chart(), m);
}

Report check_anchor_morphism(const Algebroid& A) {
  Report r;
  r.title = "anchor as a morphism Pi A -> Pi T M";
  ChartPtr tm = antitangent_chart(A.chart());
  Substitution rho = anchor_morphism(A, tm);
  VectorField d_tm(tm);
  for (auto a : tm->indices_of(CoordKind::base)) d_tm.set(a, Expression::coordinate(tm, differential_name(tm->at(a).name)));
  for (std::size_t z = 0; z < tm->size(); ++z) {
    Expression lhs = A.differential().apply(rho.image(z));
    Expression rhs = rho.apply(d_tm.apply(Expression::coordinate(tm, z)));
    Expression res = lhs - rhs;
    r.add("d_A rho^* = rho^* d on " + tm->at(z).name, res.is_zero(), residual_text(res));
  }
  return r;
}

Algebroid tangent_algebroid(const std::vector<std::string>& base) {
  std::vector<std::string> odd;
  for (const auto& x : base) odd.push_back(differential_name(x));
  AlgebroidSpec spec;
  spec.chart = algebroid_chart("PiTM", base, odd);
  for (const auto& x : base) spec.anchor.emplace(std::pair{differential_name(x), x}, Expression::constant(spec.chart, 1));
  return Algebroid::make(spec).verify();
}

Algebroid lie_algebra(const std::vector<std::string>& odd,
                      const std::map<std::tuple<std::string, std::string, std::string>, Rational>& constants) {
  AlgebroidSpec spec;
  spec.chart = algebroid_chart("Pig", {}, odd);
  for (const auto& [key, c] : constants) spec.structure.emplace(key, Expression::constant(spec.chart, c));
  return Algebroid::make(spec);
}

std::string star_name(const std::string& coordinate) { return coordinate + "_star"; }

ChartPtr anticotangent_chart(const std::vector<std::string>& base, const std::string& name) {
  std::vector<std::string> odd;
  for (const auto& x : base) odd.push_back(star_name(x));
  return algebroid_chart(name, base, odd);
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> schouten_pairs(const ChartPtr& c) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto bases = c->indices_of(CoordKind::base);
  for (auto a : bases) {
    auto s = c->find(star_name(c->at(a).name));
    if (!s || !is_odd(c->at(*s).parity)) throw DomainError("chart " + c->name() + " is not an anticotangent chart");
    pairs.emplace_back(a, *s);
  }
  if (pairs.size() * 2 != c->size()) throw DomainError("chart " + c->name() + " is not an anticotangent chart");
  return pairs;
}

}  // namespace

Expression schouten_bracket(const Expression& X, const Expression& Y) {
  require_same_chart(X.chart(), Y.chart(), "Schouten bracket");
  if (X.is_zero() || Y.is_zero()) return Expression(X.is_zero() ? Y.chart() : X.chart());
  const auto pairs = schouten_pairs(X.chart());
  auto [Xe, Xo] = split_parity(X);
  Expression r(X.chart());
  for (const auto& [a, s] : pairs) {
    // X even: sign -1, X odd: sign +1
    r -= Xe.derivative(s) * Y.derivative(a);
    r += Xo.derivative(s) * Y.derivative(a);
    r -= X.derivative(a) * Y.derivative(s);
  }
  return r;
}

PoissonStructure PoissonStructure::make(ChartPtr chart,
                                        const std::map<std::pair<std::string, std::string>, Expression>& entries) {
  auto pairs = schouten_pairs(chart);
  PoissonStructure P;
  P.chart = chart;
  const auto n = pairs.size();
  P.dense_.assign(n, std::vector<Expression>(n, Expression(chart)));
  auto idx = [&](const std::string& s) {
    for (std::size_t a = 0; a < n; ++a) {
      if (chart->at(pairs[a].first).name == s) return a;
    }
    throw DomainError("'" + s + "' is not a base coordinate of " + chart->name());
  };
  std::set<std::pair<std::size_t, std::size_t>> given;
  for (const auto& [key, e] : entries) {
    require_base(e, "P[" + key.first + "][" + key.second + "]");
    auto a = idx(key.first), b = idx(key.second);
    if (a == b) {
      if (!e.is_zero()) throw DomainError("Poisson tensor must be antisymmetric: diagonal entry " + key.first);
      continue;
    }
    if (given.count({b, a})) {
      if (!(P.dense_[b][a] + e).is_zero()) throw DomainError("Poisson tensor entries for " + key.first + "," + key.second + " are not antisymmetric");
      continue;
    }
    given.insert({a, b});
    P.dense_[a][b] = e.is_zero() ? Expression(chart) : e;
    P.dense_[b][a] = -P.dense_[a][b];
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (!P.dense_[a][b].is_zero()) P.P.emplace(std::pair{chart->at(pairs[a].first).name, chart->at(pairs[b].first).name}, P.dense_[a][b]);
    }
  }
  return P;
}

const Expression& PoissonStructure::entry(std::size_t a, std::size_t b) const { return dense_.at(a).at(b); }

Expression PoissonStructure::bivector() const {
  auto pairs = schouten_pairs(chart);
  Expression r(chart);
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      if (dense_[a][b].is_zero()) continue;
      r += Rational(1, 2) * (dense_[a][b] * Expression::coordinate(chart, pairs[b].second) *
                             Expression::coordinate(chart, pairs[a].second));
    }
  }
  return r;
}

Expression schouten_square(const PoissonStructure& P) {
  Expression p = P.bivector();
  if (p.is_zero()) return Expression(P.chart);
  return schouten_bracket(p, p);
}

CotangentAlgebroid cotangent_algebroid(const PoissonStructure& P) {
  Expression sq = schouten_square(P);
  if (!sq.is_zero()) throw PreconditionError("Poisson tensor violates Jacobi: [[P,P]] = " + sq.str());
  const auto& c = P.chart;
  Expression p = P.bivector();
  CotangentAlgebroid out;
  out.report.title = "Lichnerowicz-Poisson differential on " + c->name();
  out.d_P = VectorField(c);
  for (std::size_t z = 0; z < c->size(); ++z) {
    Expression zc = Expression::coordinate(c, z);
    out.d_P.set(z, p.is_zero() ? Expression(c) : schouten_bracket(p, zc));
  }
  VectorField sq_field = Rational(1, 2) * bracket(out.d_P, out.d_P);
  out.report.add("d_P^2 = 0", sq_field.is_zero(), sq_field.is_zero() ? std::string() : sq_field.str());

  AlgebroidSpec spec;
  spec.chart = c;
  auto pairs = schouten_pairs(c);
  for (const auto& [a, s] : pairs) {
    for (const auto& [b, t] : pairs) {
      // d_P(x^a) = xi^b Q_b^a with xi^b = x*_b
      Expression q = out.d_P.component(a).derivative(t);
      if (!q.is_zero()) spec.anchor.emplace(std::pair{c->at(t).name, c->at(a).name}, q);
    }
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        // d(xi^k) = 1/2 xi^i xi^j Q_ji^k, so Q_ij^k = d/dxi^i d/dxi^j d(xi^k)
        Expression q = out.d_P.component(pairs[k].second).derivative(pairs[j].second).derivative(pairs[i].second);
        if (!q.is_zero()) {
          spec.structure.emplace(std::tuple{c->at(pairs[i].second).name, c->at(pairs[j].second).name,
                                            c->at(pairs[k].second).name},
                                 q);
        }
      }
    }
  }
  Algebroid A = Algebroid::make(spec);
  bool same = A.differential() == out.d_P;
  out.report.add("d_P matches the algebroid form read off from P", same,
                 same ? std::string() : A.differential().str() + " vs " + out.d_P.str());
  Report s = check_structure(A);
  out.report.merge(s, "read-off algebroid: ");
  if (!out.report.passed()) throw ConsistencyError(out.report.str());
  out.algebroid = A.verify();
  return out;
}

}  // namespace graded
