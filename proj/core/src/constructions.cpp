#include "graded/constructions.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <set>

#include "graded/errors.hpp"

namespace graded {

namespace {

Expression coord(const ChartPtr& c, const std::string& name) { return Expression::coordinate(c, name); }

std::vector<std::string> base_names_of(const ChartPtr& c) { return c->names_of(CoordKind::base); }

void require_base_chart(const ChartPtr& base) {
  for (const auto& c : base->coords()) {
    if (c.kind != CoordKind::base) throw DomainError("affine connections live on base charts; found " + c.name);
  }
}

std::string affine_symbol(const std::string& symbol, const std::string& c, const std::string& a, const std::string& b) {
  return symbol + "_" + c + "_" + (a < b ? a : b) + "_" + (a < b ? b : a);
}

/// Qn(i, a) for an odd rank index i and a base name a.
Expression anchor_by_name(const Algebroid& A, std::size_t i, const std::string& a) {
  for (std::size_t k = 0; k < A.base_dim(); ++k) {
    if (A.chart()->at(A.base(k)).name == a) return A.anchor(i, k);
  }
  throw DomainError("algebroid has no base coordinate " + a);
}

std::string odd_name(const Algebroid& A, std::size_t i) { return A.chart()->at(A.odd(i)).name; }

std::size_t odd_index(const Algebroid& A, const std::string& name) {
  for (std::size_t i = 0; i < A.rank(); ++i) {
    if (odd_name(A, i) == name) return i;
  }
  throw DomainError("algebroid has no odd coordinate " + name);
}

Expression block_at(const AlgebroidLinearBlocks& b, const ChartPtr& chart, const std::string& J, const std::string& i,
                    const std::string& I) {
  auto it = b.find({J, i, I});
  return it == b.end() ? Expression(chart) : it->second.embed(chart);
}

std::string field_diff(const VectorField& a, const VectorField& b) {
  if (a == b) return {};
  return "difference " + (a - b).str();
}

}  // namespace

// ---- affine connections -------------------------------------------------------

AffineConnectionData AffineConnectionData::make(
    ChartPtr base, const std::map<std::tuple<std::string, std::string, std::string>, Expression>& entries) {
  require_base_chart(base);
  AffineConnectionData g;
  g.base_ = base;
  const std::size_t n = base->size();
  g.g_.assign(n, std::vector<std::vector<Expression>>(n, std::vector<Expression>(n, Expression(base))));
  std::set<std::array<std::size_t, 3>> given;
  for (const auto& [key, e] : entries) {
    const auto& [c, a, b] = key;
    std::size_t ci = base->index(c), ai = base->index(a), bi = base->index(b);
    Expression v = e.embed(base);
    if (!v.is_base()) throw DomainError("affine connection components must be base functions");
    if (given.count({ci, bi, ai}) && !(g.g_[ci][bi][ai] == v)) {
      throw DomainError("asymmetric affine connection: G^" + c + "_" + a + b + " != G^" + c + "_" + b + a);
    }
    g.g_[ci][ai][bi] = v;
    g.g_[ci][bi][ai] = v;
    given.insert({ci, ai, bi});
  }
  return g;
}

AffineConnectionData AffineConnectionData::formal(ChartPtr base, const std::string& symbol) {
  require_base_chart(base);
  std::vector<Expression> args;
  for (std::size_t r = 0; r < base->size(); ++r) args.push_back(Expression::coordinate(base, r));
  std::map<std::tuple<std::string, std::string, std::string>, Expression> m;
  auto names = base_names_of(base);
  for (const auto& c : names) {
    for (const auto& a : names) {
      for (const auto& b : names) {
        if (b < a) continue;
        m.emplace(std::tuple{c, a, b}, Expression::function(base, affine_symbol(symbol, c, a, b), args));
      }
    }
  }
  return make(base, m);
}

bool AffineConnectionData::is_zero() const {
  for (const auto& x : g_) {
    for (const auto& y : x) {
      for (const auto& z : y) {
        if (!z.is_zero()) return false;
      }
    }
  }
  return true;
}

RiemannTensorData riemann(const AffineConnectionData& g) {
  const std::size_t n = g.dim();
  RiemannTensorData R;
  R.base = g.base();
  R.r.assign(n, std::vector<std::vector<std::vector<Expression>>>(
                    n, std::vector<std::vector<Expression>>(n, std::vector<Expression>(n, Expression(g.base())))));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t d = 0; d < n; ++d) {
          Expression e = g.at(a, d, b).derivative(c) - g.at(a, c, b).derivative(d);
          for (std::size_t k = 0; k < n; ++k) e += g.at(a, c, k) * g.at(k, d, b) - g.at(a, d, k) * g.at(k, c, b);
          R.r[a][b][c][d] = e;
        }
      }
    }
  }
  return R;
}

// ---- T^2 M --------------------------------------------------------------------

ChartPtr t2m_chart(const ChartPtr& base) { return higher_tangent_chart(base, 2, "T2" + base->name()); }

ChartPtr t2m_split_chart(const ChartPtr& base) {
  ChartBuilder b("T" + base->name() + "xT" + base->name(), 1);
  for (const auto& n : base_names_of(base)) {
    b.base(n);
    b.fiber(lifted_name(n, 1), {1});
    b.fiber(lifted_name(n, 2), {2});
  }
  return b.build();
}

TransitionMap t2m_splitting(const AffineConnectionData& g) {
  ChartPtr T = t2m_chart(g.base());
  ChartPtr S = t2m_split_chart(g.base());
  auto names = base_names_of(g.base());
  const std::size_t n = names.size();
  std::map<std::string, Expression> fwd, inv;
  for (std::size_t c = 0; c < n; ++c) {
    Expression f = coord(T, lifted_name(names[c], 2));
    Expression b = coord(S, lifted_name(names[c], 2));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t bb = 0; bb < n; ++bb) {
        const Expression& G = g.at(c, bb, a);
        if (G.is_zero()) continue;
        f -= Rational(1, 2) * (coord(T, lifted_name(names[a], 1)) * coord(T, lifted_name(names[bb], 1)) * G.embed(T));
        b += Rational(1, 2) * (coord(S, lifted_name(names[a], 1)) * coord(S, lifted_name(names[bb], 1)) * G.embed(S));
      }
    }
    fwd.emplace(lifted_name(names[c], 2), f);
    inv.emplace(lifted_name(names[c], 2), b);
  }
  return TransitionMap::make("phi", T, S, fwd, inv);
}

namespace {

struct Jacobians {
  std::vector<std::vector<Expression>> J;     // J[c'][c] = d x^{c'} / d x^c, on the source
  std::vector<std::vector<Expression>> Jinv;  // Jinv[a][a'] = d x^a / d x^{a'}, pulled back to the source
};

Jacobians jacobians(const TransitionMap& bc) {
  const std::size_t n = bc.source->size();
  Jacobians j;
  j.J.assign(n, std::vector<Expression>(n, Expression(bc.source)));
  j.Jinv.assign(n, std::vector<Expression>(n, Expression(bc.source)));
  for (std::size_t cp = 0; cp < n; ++cp) {
    for (std::size_t c = 0; c < n; ++c) {
      j.J[cp][c] = bc.forward.image(cp).derivative(c);
      j.Jinv[c][cp] = bc.forward.apply(bc.inverse.image(c).derivative(cp));
    }
  }
  return j;
}

void require_base_change(const AffineConnectionData& g, const TransitionMap& bc) {
  require_same_chart(g.base(), bc.source, "base change");
  if (bc.source->size() != bc.target->size()) throw DomainError("base change between charts of different dimension");
  if (!bc.has_inverse()) throw IncompleteMap("base change " + bc.name + " has no supplied inverse");
}

/// x_2 -> 2 x_2 on a T^2 M chart.
Substitution taylor_scale(const ChartPtr& T, const Rational& s) {
  std::map<std::string, Expression> m;
  for (const auto& c : T->coords()) {
    if (c.weight[0] == 2) m.emplace(c.name, s * coord(T, c.name));
  }
  return Substitution::make(T, T, m);
}

/// Second-order coordinates normalised as Taylor coefficients (1/2 of the second derivative).
TransitionMap taylor_t2m_transition(const TransitionMap& bc) {
  TransitionMap fdb = higher_tangent_transition(bc, 2);
  Substitution up_src = taylor_scale(fdb.source, 2);
  Substitution up_tgt = taylor_scale(fdb.target, 2);
  std::map<std::string, Expression> fwd, inv;
  for (const auto& c : fdb.target->coords()) {
    Expression e = up_src.apply(fdb.forward.image(c.name));
    fwd.emplace(c.name, c.weight[0] == 2 ? Rational(1, 2) * e : e);
  }
  for (const auto& c : fdb.source->coords()) {
    Expression e = up_tgt.apply(fdb.inverse.image(c.name));
    inv.emplace(c.name, c.weight[0] == 2 ? Rational(1, 2) * e : e);
  }
  return TransitionMap::make(bc.name + "^(2,taylor)", fdb.source, fdb.target, fwd, inv);
}

TransitionMap split_transition(const TransitionMap& bc) {
  ChartPtr S = t2m_split_chart(bc.source);
  ChartPtr Sp = t2m_split_chart(bc.target);
  Jacobians j = jacobians(bc);
  auto src = base_names_of(bc.source);
  auto tgt = base_names_of(bc.target);
  const std::size_t n = src.size();
  std::map<std::string, Expression> fwd, inv;
  for (std::size_t cp = 0; cp < n; ++cp) {
    fwd.emplace(tgt[cp], bc.forward.image(cp).embed(S));
    inv.emplace(src[cp], bc.inverse.image(cp).embed(Sp));
  }
  for (int w = 1; w <= 2; ++w) {
    for (std::size_t cp = 0; cp < n; ++cp) {
      Expression f(S), b(Sp);
      for (std::size_t c = 0; c < n; ++c) {
        f += j.J[cp][c].embed(S) * coord(S, lifted_name(src[c], w));
        b += bc.inverse.apply(j.Jinv[cp][c]).embed(Sp) * coord(Sp, lifted_name(tgt[c], w));
      }
      fwd.emplace(lifted_name(tgt[cp], w), f);
      inv.emplace(lifted_name(src[cp], w), b);
    }
  }
  return TransitionMap::make(bc.name + "^split", S, Sp, fwd, inv);
}

Report commutes(const TransitionMap& phi, const TransitionMap& phip, const TransitionMap& t2, const TransitionMap& ts,
                const std::string& label) {
  Report r;
  for (std::size_t s = 0; s < ts.target->size(); ++s) {
    const auto& name = ts.target->at(s).name;
    Expression p1 = t2.forward.apply(phip.forward.image(name).embed(t2.target));
    Expression p2 = phi.forward.apply(ts.forward.image(s)).embed(t2.source);
    Expression res = p1 - p2;
    r.add(label + "splitting commutes on " + name, res.is_zero(), res.is_zero() ? std::string() : "residual " + res.str());
  }
  return r;
}

}  // namespace

AffineConnectionData transform_affine(const AffineConnectionData& g, const TransitionMap& bc) {
  require_base_change(g, bc);
  Jacobians j = jacobians(bc);
  auto tgt = base_names_of(bc.target);
  const std::size_t n = tgt.size();
  std::map<std::tuple<std::string, std::string, std::string>, Expression> out;
  for (std::size_t cp = 0; cp < n; ++cp) {
    for (std::size_t ap = 0; ap < n; ++ap) {
      for (std::size_t bp = ap; bp < n; ++bp) {
        Expression e(bc.source);
        for (std::size_t a = 0; a < n; ++a) {
          for (std::size_t b = 0; b < n; ++b) {
            Expression inner = bc.forward.image(cp).derivative(a).derivative(b);
            for (std::size_t c = 0; c < n; ++c) inner += g.at(c, b, a).embed(bc.source) * j.J[cp][c];
            if (inner.is_zero()) continue;
            e += j.Jinv[a][ap] * j.Jinv[b][bp] * inner;
          }
        }
        out.emplace(std::tuple{tgt[cp], tgt[ap], tgt[bp]}, bc.inverse.apply(e));
      }
    }
  }
  return AffineConnectionData::make(bc.target, out);
}

Report t2m_splitting_well_defined(const AffineConnectionData& g, const TransitionMap& bc) {
  require_base_change(g, bc);
  Report r;
  r.title = "T2M splitting under " + bc.name;
  AffineConnectionData gp = transform_affine(g, bc);
  TransitionMap phi = t2m_splitting(g);
  TransitionMap phip = t2m_splitting(gp);
  TransitionMap ts = split_transition(bc);
  TransitionMap taylor = taylor_t2m_transition(bc);
  TransitionMap fdb = higher_tangent_transition(bc, 2);
  r.merge(validate_transition(phi), "phi: ");
  r.merge(validate_transition(ts), "T M x T M change: ");
  r.merge(validate_transition(taylor), "T2M change: ");
  r.merge(commutes(phi, phip, taylor, ts, "Taylor-normalised x_2: "));
  // With x_2 the plain second derivative the displayed splitting picks up
  // 1/2 d^2x'/dx dx x_1 x_1 and is not well defined.
  Report plain = commutes(phi, phip, fdb, ts, "");
  r.note("second-derivative x_2: splitting commutes", plain.passed(),
         plain.passed() ? std::string() : plain.failures().front().detail);
  return r;
}

AlgebroidLinearBlocks levi_civita_block(const AffineConnectionData& g, const Algebroid& tangent) {
  auto names = base_names_of(g.base());
  AlgebroidLinearBlocks b;
  for (std::size_t bi = 0; bi < names.size(); ++bi) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      for (std::size_t c = 0; c < names.size(); ++c) {
        const Expression& G = g.at(c, bi, i);
        if (G.is_zero()) continue;
        b.emplace(std::tuple{names[bi], differential_name(names[i]), names[c]}, G.embed(tangent.chart()));
      }
    }
  }
  return b;
}

T2MConstruction canonical_t2m_connection(const AffineConnectionData& g, const AlgebroidLinearBlocks& block,
                                         const Algebroid& A) {
  auto names = base_names_of(g.base());
  {
    auto an = base_names_of(A.chart());
    if (std::set<std::string>(an.begin(), an.end()) != std::set<std::string>(names.begin(), names.end())) {
      throw DomainError("affine connection and algebroid live over different bases");
    }
  }
  for (const auto& [k, e] : block) {
    const auto& [b, i, c] = k;
    if (!g.base()->contains(b) || !g.base()->contains(c)) throw DomainError("block indices must be base coordinates");
    if (!A.chart()->contains(i) || A.chart()->at(A.chart()->index(i)).kind != CoordKind::algebroid_odd) {
      throw DomainError("'" + i + "' is not an odd coordinate of the algebroid");
    }
  }
  const std::size_t n = names.size();
  T2MConstruction out;
  out.phi = t2m_splitting(g);
  ChartPtr S = out.phi.target;
  ChartPtr T = out.phi.source;

  ChartPtr Ps = product_chart(A.chart(), S);
  LinearBlocks lb;
  for (const auto& [k, e] : block) {
    const auto& [b, i, c] = k;
    for (int w = 1; w <= 2; ++w) lb.emplace(std::tuple{lifted_name(b, w), i, lifted_name(c, w)}, e);
  }
  out.split = split_connection(A, S, christoffels_from_blocks(Ps, lb));
  out.nabla = unsplit_via_splitting(out.split, out.phi);

  // closed form
  ChartPtr P = product_chart(A.chart(), T);
  auto x1 = [&](std::size_t a) { return coord(P, lifted_name(names[a], 1)); };
  auto x2 = [&](std::size_t a) { return coord(P, lifted_name(names[a], 2)); };
  auto G = [&](std::size_t c, std::size_t a, std::size_t b) { return g.at(c, a, b).embed(P); };
  ChristoffelData closed;
  for (std::size_t i = 0; i < A.rank(); ++i) {
    const std::string on = odd_name(A, i);
    auto B = [&](std::size_t J, std::size_t I) { return block_at(block, P, names[J], on, names[I]); };
    for (std::size_t c = 0; c < n; ++c) {
      Expression g1(P), g2(P);
      for (std::size_t b = 0; b < n; ++b) {
        g1 += x1(b) * B(b, c);
        g2 += x2(b) * B(b, c);
      }
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          Expression br(P);
          for (std::size_t d = 0; d < n; ++d) {
            br += anchor_by_name(A, i, names[d]).embed(P) * g.at(c, b, a).derivative(d).embed(P);
            br += G(c, b, d) * B(a, d) - G(d, b, a) * B(d, c) + G(c, a, d) * B(b, d);
          }
          if (!br.is_zero()) g2 += Rational(1, 2) * (x1(a) * x1(b) * br);
        }
      }
      if (!g1.is_zero()) closed[{on, lifted_name(names[c], 1)}] = g1;
      if (!g2.is_zero()) closed[{on, lifted_name(names[c], 2)}] = g2;
    }
  }
  out.closed_form = assemble(A, T, closed);

  Report& r = out.report;
  r.title = "canonical weighted connection on " + T->name();
  for (std::size_t i = 0; i < A.rank(); ++i) {
    for (std::size_t c = 0; c < n; ++c) {
      for (int w = 1; w <= 2; ++w) {
        const std::string on = odd_name(A, i);
        const std::string fn = lifted_name(names[c], w);
        Expression lhs = out.nabla.gamma(on, fn);
        Expression rhs = out.closed_form.gamma(on, fn);
        Expression res = lhs - rhs;
        r.add("Gamma[" + std::to_string(w) + "] along " + on + " for " + fn + " matches the closed form", res.is_zero(),
              res.is_zero() ? std::string() : "residual " + res.str());
      }
    }
  }
  r.add("unsplit connection equals the closed-form connection", out.nabla.field() == out.closed_form.field(),
        field_diff(out.nabla.field(), out.closed_form.field()));
  return out;
}

Report t2m_levi_civita_report(const AffineConnectionData& g) {
  auto names = base_names_of(g.base());
  const std::size_t n = names.size();
  Algebroid A = tangent_algebroid(names);
  T2MConstruction C = canonical_t2m_connection(g, levi_civita_block(g, A), A);
  Report r = C.report;
  r.title = "Levi-Civita weighted connection on T2" + g.base()->name();
  const ChartPtr& P = C.nabla.product();
  auto x1 = [&](std::size_t a) { return coord(P, lifted_name(names[a], 1)); };
  auto x2 = [&](std::size_t a) { return coord(P, lifted_name(names[a], 2)); };
  auto G = [&](std::size_t c, std::size_t a, std::size_t b) { return g.at(c, a, b).embed(P); };
  auto dG = [&](std::size_t c, std::size_t a, std::size_t b, std::size_t d) { return g.at(c, a, b).derivative(d).embed(P); };

  // Gamma^a_b[1], Gamma^a_b[2]
  for (std::size_t b = 0; b < n; ++b) {
    const std::string on = differential_name(names[b]);
    for (std::size_t a = 0; a < n; ++a) {
      Expression g1(P), g2(P);
      for (std::size_t c = 0; c < n; ++c) {
        g1 += x1(c) * G(a, c, b);
        g2 += x2(c) * G(a, c, b);
        for (std::size_t d = 0; d < n; ++d) {
          Expression br = dG(a, d, c, b);
          for (std::size_t e = 0; e < n; ++e) {
            br += G(e, d, b) * G(a, e, c) - G(e, d, c) * G(a, e, b) + G(e, c, b) * G(a, e, d);
          }
          g2 += Rational(1, 2) * (x1(c) * x1(d) * br);
        }
      }
      r.add("Gamma^" + names[a] + "_" + names[b] + "[1] closed form", C.nabla.gamma(on, lifted_name(names[a], 1)) == g1);
      Expression res = C.nabla.gamma(on, lifted_name(names[a], 2)) - g2;
      r.add("Gamma^" + names[a] + "_" + names[b] + "[2] closed form", res.is_zero(),
            res.is_zero() ? std::string() : "residual " + res.str());
    }
  }

  // quasi-action x_2^a -> x_2^a + eps u^i (x_2^b G^a_bi + 1/2 x_1^b x_1^c G^a_bci)
  ChartPtr F = C.nabla.bundle();
  const ChartPtr& M = A.chart();
  std::vector<Expression> margs;
  for (const auto& nm : names) margs.push_back(coord(M, nm));
  Section u;
  for (std::size_t i = 0; i < n; ++i) u.u.push_back(Expression::function(M, "u" + std::to_string(i + 1), margs));
  Substitution act = quasi_action(C.nabla, u);
  auto Gf = [&](std::size_t c, std::size_t a, std::size_t b) { return g.at(c, a, b).embed(F); };
  auto dGf = [&](std::size_t c, std::size_t a, std::size_t b, std::size_t d) { return g.at(c, a, b).derivative(d).embed(F); };
  auto f1 = [&](std::size_t a) { return coord(F, lifted_name(names[a], 1)); };
  auto f2 = [&](std::size_t a) { return coord(F, lifted_name(names[a], 2)); };
  bool literal_ok = true;
  for (std::size_t a = 0; a < n; ++a) {
    Expression want = f2(a), literal = f2(a);
    for (std::size_t i = 0; i < n; ++i) {
      Expression ui = u.u[i].embed(F) * Expression::epsilon(F);
      Expression lin(F), quad(F), quad_lit(F);
      for (std::size_t b = 0; b < n; ++b) lin += f2(b) * Gf(a, b, i);
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t c = 0; c < n; ++c) {
          // with Q_i^d = delta_i^d
          Expression corrected = dGf(a, c, b, i);
          Expression printed = dGf(a, b, c, i);
          for (std::size_t e = 0; e < n; ++e) {
            corrected += Gf(a, c, e) * Gf(e, b, i) - Gf(e, c, b) * Gf(a, e, i) + Gf(a, b, e) * Gf(e, c, i);
            printed += Gf(a, c, e) * Gf(e, b, i) - Gf(e, c, b) * Gf(c, e, i) + Gf(a, b, e) * Gf(a, c, i);
          }
          quad += f1(b) * f1(c) * corrected;
          quad_lit += f1(b) * f1(c) * printed;
        }
      }
      want += ui * (lin + Rational(1, 2) * quad);
      literal += ui * (lin + Rational(1, 2) * quad_lit);
    }
    Expression res = act.image(lifted_name(names[a], 2)) - want;
    r.add("quasi-action on " + lifted_name(names[a], 2) + " with G_bci = d_i G_cb + G_ce G_bi - G_cb G_ei + G_be G_ci",
          res.is_zero(), res.is_zero() ? std::string() : "residual " + res.str());
    literal_ok = literal_ok && act.image(lifted_name(names[a], 2)) == literal;
  }
  r.note("quasi-action coefficient with the repeated-index reading -G_cb^e G_ei^c, +G_be^a G_ci^a", literal_ok);
  return r;
}

namespace {

/// Reading of the Riemann symbol R^f_{cba} used when comparing with the closed form.
struct RiemannVariant {
  int orientation;               // +1: R of G, -1: R of -G
  int sign;                      // overall sign
  std::array<int, 3> perm;       // positions of (c, b, a) in R^f_{...}
  std::string label() const {
    static const char* idx = "cba";
    std::string s = orientation > 0 ? "R[G]" : "R[-G]";
    s += "^f_";
    for (int p : perm) s += idx[p];
    return (sign > 0 ? "+" : "-") + s;
  }
};

std::vector<RiemannVariant> riemann_variants() {
  std::vector<RiemannVariant> v;
  std::array<int, 3> p{0, 1, 2};
  for (int o : {1, -1}) {
    for (int s : {1, -1}) {
      std::array<int, 3> q = p;
      do v.push_back({o, s, q});
      while (std::next_permutation(q.begin(), q.end()));
    }
  }
  return v;
}

}  // namespace

Report t2m_curvature_check(const AffineConnectionData& g) {
  auto names = base_names_of(g.base());
  const std::size_t n = names.size();
  Algebroid A = tangent_algebroid(names);
  T2MConstruction C = canonical_t2m_connection(g, levi_civita_block(g, A), A);
  Report r;
  r.title = "curvature of the canonical weighted connection on T2" + g.base()->name();
  const ChartPtr& P = C.nabla.product();
  VectorField R2 = curvature(C.nabla);

  TransitionMap Phi = lift_to_product(C.phi, P, C.split.product());
  VectorField pulled = transport(curvature(C.split), Phi.inverse, Phi.forward);
  r.add("nabla^2 = phi^* (nabla_split)^2 (phi^-1)^*", pulled == R2, field_diff(pulled, R2));

  auto dx = [&](std::size_t a) { return coord(P, differential_name(names[a])); };
  auto x1 = [&](std::size_t a) { return coord(P, lifted_name(names[a], 1)); };
  auto x2 = [&](std::size_t a) { return coord(P, lifted_name(names[a], 2)); };
  auto G = [&](std::size_t c, std::size_t a, std::size_t b) { return g.at(c, a, b).embed(P); };

  // derived form with formal K^f_{cab}, antisymmetric in (a, b)
  std::vector<std::string> params;
  auto kname = [&](std::size_t f, std::size_t c, std::size_t a, std::size_t b) {
    return "K_" + names[f] + "_" + names[c] + "_" + names[a] + "_" + names[b];
  };
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) params.push_back(kname(f, c, a, b));
  ChartPtr PK = with_parameters(P, params);
  auto K = [&](std::size_t f, std::size_t c, std::size_t a, std::size_t b) {
    if (a == b) return Expression(PK);
    return a < b ? coord(PK, kname(f, c, a, b)) : -coord(PK, kname(f, c, b, a));
  };
  auto GK = [&](std::size_t c, std::size_t a, std::size_t b) { return g.at(c, a, b).embed(PK); };
  auto kv = [&](std::size_t f, std::size_t c, std::size_t a, std::size_t b) {
    Expression e = g.at(f, c, b).derivative(a) - g.at(f, c, a).derivative(b);
    for (std::size_t k = 0; k < n; ++k) e += g.at(k, c, a) * g.at(f, k, b) - g.at(k, c, b) * g.at(f, k, a);
    return e;
  };
  std::map<std::string, Expression> kimg, kzero;
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
          kimg.emplace(kname(f, c, a, b), kv(f, c, a, b).embed(P));
          kzero.emplace(kname(f, c, a, b), Expression(P));
        }
  Substitution toK = Substitution::make(PK, P, kimg);
  Substitution toZero = Substitution::make(PK, P, kzero);

  VectorField derived(PK);
  for (std::size_t f = 0; f < n; ++f) {
    Expression c1(PK), c2(PK);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        Expression dd = Rational(1, 2) * (coord(PK, differential_name(names[a])) * coord(PK, differential_name(names[b])));
        Expression s1(PK), s2(PK);
        for (std::size_t c = 0; c < n; ++c) {
          s1 += coord(PK, lifted_name(names[c], 1)) * K(f, c, a, b);
          s2 += coord(PK, lifted_name(names[c], 2)) * K(f, c, a, b);
          for (std::size_t d = 0; d < n; ++d) {
            Expression q(PK);
            for (std::size_t e = 0; e < n; ++e) {
              q += GK(f, d, e) * K(e, c, a, b) + GK(f, c, e) * K(e, d, a, b) - GK(e, d, c) * K(f, e, a, b);
            }
            s2 += Rational(1, 2) * (coord(PK, lifted_name(names[c], 1)) * coord(PK, lifted_name(names[d], 1)) * q);
          }
        }
        c1 += dd * s1;
        c2 += dd * s2;
      }
    }
    derived.set(lifted_name(names[f], 1), c1);
    derived.set(lifted_name(names[f], 2), c2);
  }
  VectorField derivedK(P), derived0(P);
  for (const auto& [rank, e] : derived.components()) {
    derivedK.set(PK->at(rank).name, toK.apply(e));
    derived0.set(PK->at(rank).name, toZero.apply(e));
  }
  r.add("nabla^2 equals the derived form in K^f_cab", derivedK == R2, field_diff(derivedK, R2));

  // K is the Riemann tensor of -G: K^f_cab = -R[-G]^f_cab
  AffineConnectionData neg = AffineConnectionData::make(g.base(), {});
  {
    std::map<std::tuple<std::string, std::string, std::string>, Expression> m;
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) m.emplace(std::tuple{names[c], names[a], names[b]}, -g.at(c, a, b));
    neg = AffineConnectionData::make(g.base(), m);
  }
  RiemannTensorData Rpos = riemann(g);
  RiemannTensorData Rneg = riemann(neg);
  bool k_is_r = true;
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) k_is_r = k_is_r && kv(f, c, a, b) == -Rneg.at(f, c, a, b);
  r.add("K^f_cab = -R[-G]^f_cab", k_is_r);
  r.add("R = 0 gives nabla^2 = 0", derived0.is_zero());

  // closed form in the Riemann symbol under every documented reading
  auto display = [&](const std::function<Expression(std::size_t, std::size_t, std::size_t, std::size_t)>& Rs, const Rational& last) {
    VectorField D(P);
    for (std::size_t f = 0; f < n; ++f) {
      Expression c1(P), c2(P);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b) continue;
          Expression dd = Rational(-1, 2) * (dx(a) * dx(b));
          Expression s1(P), s2(P);
          for (std::size_t c = 0; c < n; ++c) {
            s1 += x1(c) * Rs(f, c, b, a);
            s2 += x2(c) * Rs(f, c, b, a);
            for (std::size_t d = 0; d < n; ++d) {
              Expression q(P);
              for (std::size_t e = 0; e < n; ++e) {
                q += G(f, d, e) * Rs(e, c, b, a) + G(f, c, e) * Rs(e, d, b, a) + last * (G(e, d, c) * Rs(f, e, b, a));
              }
              s2 += Rational(1, 2) * (x1(c) * x1(d) * q);
            }
          }
          c1 += dd * s1;
          c2 += dd * s2;
        }
      }
      D.set(lifted_name(names[f], 1), c1);
      D.set(lifted_name(names[f], 2), c2);
    }
    return D;
  };
  auto part = [&](const VectorField& X, int w) {
    VectorField Y(P);
    for (std::size_t f = 0; f < n; ++f) Y.set(lifted_name(names[f], w), X.component(lifted_name(names[f], w)));
    return Y;
  };
  std::vector<std::string> match1, match2, match_corrected;
  for (const auto& v : riemann_variants()) {
    const RiemannTensorData& Rt = v.orientation > 0 ? Rpos : Rneg;
    auto Rs = [&](std::size_t f, std::size_t c, std::size_t b, std::size_t a) {
      std::array<std::size_t, 3> idx{c, b, a};
      Expression e = Rt.at(f, idx[v.perm[0]], idx[v.perm[1]], idx[v.perm[2]]).embed(P);
      return v.sign > 0 ? e : -e;
    };
    VectorField D = display(Rs, Rational(-2));
    VectorField Dc = display(Rs, Rational(-1));
    if (part(D, 1) == part(R2, 1)) match1.push_back(v.label());
    if (part(D, 1) == part(R2, 1) && part(D, 2) == part(R2, 2)) match2.push_back(v.label());
    if (Dc == R2) match_corrected.push_back(v.label());
  }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s.empty() ? std::string("none") : s;
  };
  r.add("x_1 component matches the Riemann closed form", !match1.empty(), "conventions: " + join(match1));
  r.add("x_2 component matches the Riemann closed form (coefficient -2 on G^e_dc R^f_eba)", !match2.empty(),
        "conventions: " + join(match2));
  r.note("both components match with coefficient -1 on G^e_dc R^f_eba", !match_corrected.empty(),
         "conventions: " + join(match_corrected));
  VectorField D0 = display([&](std::size_t, std::size_t, std::size_t, std::size_t) { return Expression(P); }, Rational(-2));
  r.add("Riemann closed form vanishes at R = 0", D0.is_zero());
  return r;
}

Report t2m_gauge_equivalence(const AffineConnectionData& g1, const AffineConnectionData& g2,
                             const AlgebroidLinearBlocks& block, const Algebroid& A) {
  T2MConstruction c1 = canonical_t2m_connection(g1, block, A);
  T2MConstruction c2 = canonical_t2m_connection(g2, block, A);
  Report r;
  r.title = "gauge equivalence of canonical connections";
  TransitionMap g = splitting_gauge(c1.nabla.product(), c1.split.product(), c1.phi, c2.phi);
  r.merge(validate_gauge(c1.nabla.product(), g), "gauge element: ");
  VectorField moved = gauge_transform(c2.nabla, g).field();
  r.add("gauge_transform(nabla_psi, psi^-1 o phi) = nabla_phi", moved == c1.nabla.field(), field_diff(moved, c1.nabla.field()));
  return r;
}

// ---- Poisson ----------------------------------------------------------------------

PoissonConnection poisson_contravariant(const PoissonStructure& P, const ChartPtr& bundle,
                                        const std::map<std::pair<std::string, std::string>, Expression>& gamma) {
  PoissonConnection out;
  out.cotangent = cotangent_algebroid(P);
  const Algebroid& A = out.cotangent.algebroid;
  ChristoffelData g;
  for (const auto& [k, e] : gamma) g.emplace(std::pair{star_name(k.first), k.second}, e);
  out.nabla = assemble(A, bundle, g);

  Report& r = out.report;
  r.title = "weighted contravariant connection on " + bundle->name();
  r.merge(out.cotangent.report, "cotangent algebroid: ");
  const ChartPtr& Pc = out.nabla.product();
  auto base = base_names_of(P.chart);
  const std::size_t n = base.size();
  VectorField want(Pc);
  for (std::size_t a = 0; a < n; ++a) {
    Expression e(Pc), s(Pc);
    for (std::size_t b = 0; b < n; ++b) {
      e += P.entry(a, b).embed(Pc) * coord(Pc, star_name(base[b]));
      for (std::size_t c = 0; c < n; ++c) {
        Expression d = P.entry(b, c).derivative(P.chart->index(base[a]));
        if (d.is_zero()) continue;
        s -= Rational(1, 2) * (d.embed(Pc) * coord(Pc, star_name(base[c])) * coord(Pc, star_name(base[b])));
      }
    }
    want.set(base[a], e);
    want.set(star_name(base[a]), s);
  }
  for (const auto& c : bundle->coords()) {
    if (c.kind != CoordKind::fiber) continue;
    Expression e(Pc);
    for (std::size_t a = 0; a < n; ++a) {
      auto it = gamma.find({base[a], c.name});
      if (it != gamma.end()) e += it->second.embed(Pc) * coord(Pc, star_name(base[a]));
    }
    want.set(c.name, e);
  }
  r.add("nabla = P^ab x*_b d_a - 1/2 d_a P^bc x*_c x*_b d/dx*_a + Gamma^Ia x*_a d_I", want == out.nabla.field(),
        field_diff(out.nabla.field(), want));
  return out;
}

PoissonAction poisson_action(const PoissonConnection& C, const std::map<std::string, Expression>& omega) {
  const Algebroid& A = C.cotangent.algebroid;
  std::map<std::string, Expression> comps;
  for (const auto& [a, w] : omega) comps.emplace(star_name(a), w);
  Section u = make_section(A, comps);
  PoissonAction out;
  out.action = quasi_action(C.nabla, u);
  Report& r = out.report;
  r.title = "quasi-action generated by a one-form";
  const ChartPtr& F = C.nabla.bundle();
  Expression eps = Expression::epsilon(F);
  auto base = base_names_of(A.chart());
  auto om = [&](const std::string& a) {
    auto it = omega.find(a);
    return it == omega.end() ? Expression(F) : it->second.embed(F);
  };
  for (std::size_t a = 0; a < base.size(); ++a) {
    Expression want = coord(F, base[a]);
    for (std::size_t b = 0; b < base.size(); ++b) {
      // P^{ab} read off the anchor of d_P
      Expression Pab = anchor_by_name(A, odd_index(A, star_name(base[b])), base[a]);
      want += eps * Pab.embed(F) * om(base[b]);
    }
    Expression res = out.action.image(base[a]) - want;
    r.add(base[a] + " -> " + base[a] + " + eps P^ab omega_b", res.is_zero(), res.is_zero() ? std::string() : "residual " + res.str());
  }
  for (const auto& c : F->coords()) {
    if (c.kind != CoordKind::fiber) continue;
    Expression want = coord(F, c.name);
    for (const auto& a : base) {
      Expression g = C.nabla.gamma(star_name(a), c.name);
      if (!g.is_zero()) want += eps * g.embed(F) * om(a);
    }
    Expression res = out.action.image(c.name) - want;
    r.add(c.name + " -> " + c.name + " + eps Gamma^Ia omega_a", res.is_zero(), res.is_zero() ? std::string() : "residual " + res.str());
  }
  return out;
}

// ---- T^k M ----------------------------------------------------------------------

std::vector<std::vector<int>> compositions(int l) {
  std::vector<std::vector<int>> out;
  if (l <= 0) return out;
  std::function<void(int, std::vector<int>&)> rec = [&](int left, std::vector<int>& cur) {
    if (left == 0) {
      out.push_back(cur);
      return;
    }
    for (int m = 1; m <= left; ++m) {
      cur.push_back(m);
      rec(left - m, cur);
      cur.pop_back();
    }
  };
  std::vector<int> cur;
  rec(l, cur);
  return out;
}

ChristoffelData tkm_christoffels(const ChartPtr& P, int k, const TkmBlocks& blocks) {
  TkmBlocks canon;
  for (const auto& [key, e] : blocks) {
    if (key.order < 1 || key.order > k) throw RangeError("block order " + std::to_string(key.order) + " outside 1.." + std::to_string(k));
    if (key.lower.empty()) throw DomainError("block without lower indices");
    int sum = 0;
    for (const auto& [b, m] : key.lower) {
      if (m < 1) throw DomainError("lower weights must be positive");
      auto r = P->find(b);
      if (!r || P->at(*r).kind != CoordKind::base) throw DomainError("'" + b + "' is not a base coordinate");
      sum += m;
    }
    if (sum != key.order) {
      throw GradingError("lower weights of a Gamma^(" + std::to_string(key.order) + ") block sum to " + std::to_string(sum));
    }
    if (!e.is_base()) throw DomainError("T^kM blocks must be base functions");
    TkmKey c = key;
    std::sort(c.lower.begin(), c.lower.end());
    Expression v = e.embed(P);
    auto it = canon.find(c);
    if (it != canon.end()) {
      if (!(it->second == v)) throw DomainError("blocks are not symmetric in their lower indices (order " + std::to_string(key.order) + ", upper " + key.upper + ")");
      continue;
    }
    canon.emplace(c, v);
  }
  ChristoffelData out;
  for (const auto& [key, v] : canon) {
    auto lower = key.lower;
    const int n = static_cast<int>(lower.size());
    long orderings = 0;
    do ++orderings;
    while (std::next_permutation(lower.begin(), lower.end()));
    long fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    Rational coeff(orderings, fact);
    coeff.canonicalize();
    Expression term = coeff * v;
    for (const auto& [b, m] : key.lower) term *= coord(P, lifted_name(b, m));
    auto slot = std::pair{key.odd, lifted_name(key.upper, key.order)};
    auto it = out.find(slot);
    if (it == out.end()) out.emplace(slot, term);
    else it->second += term;
  }
  return out;
}

Connection tkm_connection(const Algebroid& A, int k, const TkmBlocks& blocks) {
  ChartBuilder b("M", 1);
  for (const auto& nme : base_names_of(A.chart())) b.base(nme);
  ChartPtr F = higher_tangent_chart(b.build(), k);
  ChartPtr P = product_chart(A.chart(), F);
  return assemble(A, F, tkm_christoffels(P, k, blocks));
}

}  // namespace graded
