#include "graded/connections.hpp"

#include <set>

#include "graded/errors.hpp"

namespace graded {

namespace {

std::string residual_text(const Expression& e) { return e.is_zero() ? std::string() : "residual " + e.str(); }

Multiweight odd_weight(std::size_t gradings) {
  Multiweight w(gradings, 0);
  w.back() = 1;
  return w;
}

std::set<std::string> base_names(const ChartPtr& c) {
  auto v = c->names_of(CoordKind::base);
  return {v.begin(), v.end()};
}

Expression xi(const ChartPtr& P, std::size_t rank) { return Expression::coordinate(P, rank); }

/// Pair (odd rank on A's chart, product rank) for every odd coordinate.
std::vector<std::size_t> product_odd_ranks(const Algebroid& A, const ChartPtr& P) {
  std::vector<std::size_t> r;
  for (auto o : A.odd_ranks()) r.push_back(P->index(A.chart()->at(o).name));
  return r;
}

std::vector<std::size_t> product_fiber_ranks(const ChartPtr& bundle, const ChartPtr& P) {
  std::vector<std::size_t> r;
  for (const auto& c : bundle->coords()) {
    if (c.kind == CoordKind::fiber) r.push_back(P->index(c.name));
  }
  return r;
}

}  // namespace

ChartPtr product_chart(const ChartPtr& alg, const ChartPtr& bundle, const std::string& name) {
  if (alg->gradings() != 1) throw GradingError("algebroid chart must carry one grading");
  if (base_names(alg) != base_names(bundle)) {
    throw DomainError("algebroid chart " + alg->name() + " and bundle chart " + bundle->name() + " have different bases");
  }
  const std::size_t n = bundle->gradings() + 1;
  std::vector<CoordinateDescriptor> coords;
  for (const auto& c : bundle->coords()) {
    Multiweight w = c.weight;
    w.push_back(0);
    coords.push_back({c.name, c.parity, w, c.kind});
  }
  for (auto r : alg->indices_of(CoordKind::algebroid_odd)) {
    const auto& c = alg->at(r);
    if (bundle->contains(c.name)) throw DomainError("odd coordinate " + c.name + " clashes with a bundle coordinate");
    coords.push_back({c.name, Parity::odd, odd_weight(n), CoordKind::algebroid_odd});
  }
  return Chart::make(name.empty() ? alg->name() + "x" + bundle->name() : name, n, std::move(coords));
}

Expression Connection::gamma(const std::string& odd, const std::string& fiber) const {
  auto it = gamma_.find({odd, fiber});
  return it == gamma_.end() ? Expression(product_) : it->second;
}

Report validate_connection_field(const Algebroid& A, const ChartPtr& bundle, const VectorField& X) {
  Report r;
  const ChartPtr& P = X.chart();
  r.title = "weighted connection on " + P->name();
  VectorField d = A.differential().embed(P);
  auto odd = product_odd_ranks(A, P);
  auto fibers = product_fiber_ranks(bundle, P);

  auto p = X.parity();
  r.add("odd", X.is_zero() || (p && *p == Parity::odd));
  auto w = X.weight();
  r.add("weight " + to_string(odd_weight(P->gradings())), X.is_zero() || (w && *w == odd_weight(P->gradings())),
        w ? "weight " + to_string(*w) : std::string("mixed weights"));

  std::string proj;
  for (std::size_t z = 0; z < P->size(); ++z) {
    auto kind = P->at(z).kind;
    if (kind != CoordKind::base && kind != CoordKind::algebroid_odd) continue;
    Expression diff = X.component(z) - d.component(z);
    if (!diff.is_zero() && proj.empty()) proj = P->at(z).name + ": " + residual_text(diff);
  }
  r.add("projects to d_A", proj.empty(), proj);

  std::string lin, fib;
  for (auto y : fibers) {
    Expression comp = X.component(y);
    Expression rebuilt(P);
    for (auto o : odd) {
      Expression g = comp.derivative(o);
      if (g.depends_on_kind(CoordKind::algebroid_odd) && fib.empty()) {
        fib = "Gamma along " + P->at(o).name + " for " + P->at(y).name + " depends on xi";
      }
      rebuilt += xi(P, o) * g;
    }
    if (!(rebuilt == comp) && lin.empty()) lin = P->at(y).name + " component is not linear in xi";
  }
  r.add("fiber components linear in xi", lin.empty(), lin);
  r.add("Christoffel symbols independent of xi", fib.empty(), fib);
  return r;
}

Connection assemble(const Algebroid& A, const ChartPtr& bundle, const ChristoffelData& gamma) {
  A.require_verified("assemble");
  Connection C;
  C.algebroid_ = A;
  C.bundle_ = bundle;
  C.product_ = product_chart(A.chart(), bundle);
  const ChartPtr& P = C.product_;
  C.odd_ = product_odd_ranks(A, P);
  C.fibers_ = product_fiber_ranks(bundle, P);
  C.d_ = A.differential().embed(P);
  C.nabla_ = C.d_;
  for (const auto& [key, g0] : gamma) {
    const auto& [o, y] = key;
    auto orank = P->find(o);
    auto yrank = P->find(y);
    if (!orank || P->at(*orank).kind != CoordKind::algebroid_odd) throw DomainError("'" + o + "' is not an odd coordinate of the algebroid");
    if (!yrank || P->at(*yrank).kind != CoordKind::fiber) throw DomainError("'" + y + "' is not a fiber coordinate of " + bundle->name());
    if (g0.is_zero()) continue;
    Expression g = g0.embed(P);
    if (g.depends_on_kind(CoordKind::algebroid_odd) || g.has_epsilon()) {
      throw GradingError("Gamma[" + o + "][" + y + "] must not depend on odd coordinates: " + g.str());
    }
    Multiweight want = P->at(*yrank).weight;
    for (const auto& t : g.terms()) {
      Grade gr = grade_of_monomial(*P, t.mono);
      if (is_odd(gr.parity) || gr.weight != want) {
        throw GradingError("Gamma[" + o + "][" + y + "] must be even of weight " + to_string(want) + ", term " +
                           Expression::term_string(P, t, true) + " has " + to_string(gr));
      }
    }
    C.gamma_[key] = g;
    C.nabla_.set(*yrank, C.nabla_.component(*yrank) + xi(P, *orank) * g);
  }
  Report r = validate_connection_field(A, bundle, C.nabla_);
  if (!r.passed()) throw ConsistencyError("assembled field fails validation:\n" + r.str());
  return C;
}

Connection trivial_connection(const Algebroid& A, const ChartPtr& bundle) { return assemble(A, bundle, {}); }

Connection connection_from_field(const Algebroid& A, const ChartPtr& bundle, const VectorField& X) {
  ChartPtr P = product_chart(A.chart(), bundle);
  VectorField Y = X.embed(P);
  Report r = validate_connection_field(A, bundle, Y);
  if (!r.passed()) throw DomainError("field is not a weighted connection:\n" + r.str());
  ChristoffelData g;
  for (auto y : product_fiber_ranks(bundle, P)) {
    for (auto o : product_odd_ranks(A, P)) {
      Expression e = Y.component(y).derivative(o);
      if (!e.is_zero()) g[{P->at(o).name, P->at(y).name}] = e;
    }
  }
  Connection C = assemble(A, bundle, g);
  if (!(C.field() == Y)) throw ConsistencyError("reassembled connection differs from the input field");
  return C;
}

VectorField curvature(const Connection& C) { return Rational(1, 2) * bracket(C.field(), C.field()); }

bool is_flat(const Connection& C) { return curvature(C).is_zero(); }

namespace {

/// Curvature closed form; `literal` selects the printed index order on Q.
VectorField closed_curvature(const Connection& C, bool literal) {
  const auto& A = C.algebroid();
  const ChartPtr& P = C.product();
  const auto& odd = C.odd_ranks();
  const auto n = odd.size();
  std::vector<std::size_t> base;
  for (auto b : A.base_ranks()) base.push_back(P->index(A.chart()->at(b).name));
  auto Q = [&](std::size_t i, std::size_t a) { return A.anchor(i, a).embed(P); };
  auto Qs = [&](std::size_t i, std::size_t j, std::size_t k) { return A.structure(i, j, k).embed(P); };
  auto G = [&](std::size_t i, std::size_t y) { return C.gamma(P->at(odd[i]).name, P->at(y).name); };

  VectorField R(P);
  for (auto y : C.fiber_ranks()) {
    Expression comp(P);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        Expression inner(P);
        for (std::size_t k = 0; k < n; ++k) {
          inner += (literal ? -Qs(i, j, k) : Qs(j, i, k)) * G(k, y);
        }
        for (std::size_t a = 0; a < base.size(); ++a) {
          inner += Q(i, a) * G(j, y).derivative(base[a]);
          inner -= Q(j, a) * G(i, y).derivative(base[a]);
        }
        for (auto J : C.fiber_ranks()) {
          inner += G(i, J) * G(j, y).derivative(J);
          inner -= G(j, J) * G(i, y).derivative(J);
        }
        if (inner.is_zero()) continue;
        comp += Rational(1, 2) * (xi(P, odd[i]) * xi(P, odd[j]) * inner);
      }
    }
    R.set(y, comp);
  }
  return R;
}

}  // namespace

VectorField christoffel_curvature(const Connection& C) { return closed_curvature(C, false); }
VectorField christoffel_curvature_literal(const Connection& C) { return closed_curvature(C, true); }

namespace {

void require_same_data(const Connection& a, const Connection& b) {
  if (!a.product()->same_layout(*b.product())) throw DomainError("connections live on different product charts");
  if (!(a.base_field() == b.base_field().embed(a.product()))) {
    throw DomainError("connections are built over different algebroids");
  }
}

}  // namespace

VectorField difference(const Connection& a, const Connection& b) {
  require_same_data(a, b);
  VectorField D = a.field() - b.field().embed(a.product());
  for (const auto& [rank, e] : D.components()) {
    if (a.product()->at(rank).kind != CoordKind::fiber) {
      throw ConsistencyError("difference has a component along " + a.product()->at(rank).name);
    }
  }
  return D;
}

Connection add_vertical(const Connection& C, const VectorField& V) {
  return connection_from_field(C.algebroid(), C.bundle(), C.field() + V.embed(C.product()));
}

// ---- changes of coordinates --------------------------------------------------

TransitionMap lift_to_product(const TransitionMap& T, const ChartPtr& src, const ChartPtr& tgt) {
  std::map<std::string, Expression> fwd, inv;
  for (const auto& c : T.target->coords()) fwd.emplace(c.name, T.forward.image(c.name).embed(src));
  if (T.has_inverse()) {
    for (const auto& c : T.source->coords()) inv.emplace(c.name, T.inverse.image(c.name).embed(tgt));
  }
  TransitionMap R = T.has_inverse() ? TransitionMap::make(T.name, src, tgt, fwd, inv)
                                    : TransitionMap::forward_only(T.name, src, tgt, fwd);
  return R;
}

TransitionMap product_transition(const TransitionMap& alg, const TransitionMap& bun, const ChartPtr& src,
                                 const ChartPtr& tgt) {
  std::map<std::string, Expression> fwd, inv;
  for (const auto& c : bun.target->coords()) fwd.emplace(c.name, bun.forward.image(c.name).embed(src));
  for (const auto& c : alg.target->coords()) {
    Expression e = alg.forward.image(c.name).embed(src);
    auto it = fwd.find(c.name);
    if (it != fwd.end()) {
      if (!(it->second == e)) throw DomainError("algebroid and bundle changes disagree on base coordinate " + c.name);
    } else {
      fwd.emplace(c.name, e);
    }
  }
  if (bun.has_inverse() && alg.has_inverse()) {
    for (const auto& c : bun.source->coords()) inv.emplace(c.name, bun.inverse.image(c.name).embed(tgt));
    for (const auto& c : alg.source->coords()) {
      Expression e = alg.inverse.image(c.name).embed(tgt);
      auto it = inv.find(c.name);
      if (it != inv.end()) {
        if (!(it->second == e)) throw DomainError("algebroid and bundle inverses disagree on base coordinate " + c.name);
      } else {
        inv.emplace(c.name, e);
      }
    }
    return TransitionMap::make(alg.name + "x" + bun.name, src, tgt, fwd, inv);
  }
  return TransitionMap::forward_only(alg.name + "x" + bun.name, src, tgt, fwd);
}

ChristoffelData transform_christoffels_formal(const Connection& C, const FormalChange& change) {
  const auto& A = C.algebroid();
  const ChartPtr& P = C.product();
  std::vector<std::size_t> base;
  for (auto b : A.base_ranks()) base.push_back(P->index(A.chart()->at(b).name));
  ChristoffelData out;
  for (const auto& [fiber, T] : change.fiber_images) {
    Expression Tf = T.embed(P);
    // inner_j = Q_j^a dT/dx^a + Gamma_j^J dT/dy^J
    std::vector<Expression> inner;
    for (std::size_t j = 0; j < A.rank(); ++j) {
      Expression e(P);
      for (std::size_t a = 0; a < base.size(); ++a) {
        if (!A.anchor(j, a).is_zero()) e += A.anchor(j, a).embed(P) * Tf.derivative(base[a]);
      }
      for (auto J : C.fiber_ranks()) {
        Expression g = C.gamma(P->at(C.odd_ranks()[j]).name, P->at(J).name);
        if (!g.is_zero()) e += g * Tf.derivative(J);
      }
      inner.push_back(std::move(e));
    }
    for (const auto& ip : change.target_odd) {
      Expression g(P);
      for (std::size_t j = 0; j < A.rank(); ++j) {
        auto it = change.frame_inverse.find({ip, P->at(C.odd_ranks()[j]).name});
        if (it == change.frame_inverse.end() || it->second.is_zero()) continue;
        g += it->second.embed(P) * inner[j];
      }
      if (!g.is_zero()) out[{ip, fiber}] = g;
    }
  }
  return out;
}

namespace {

void require_valid(const TransitionMap& T) {
  Report r = validate_transition(T);
  if (!r.passed()) throw PreconditionError("invalid transition:\n" + r.str());
}

}  // namespace

ChristoffelData transform_christoffels(const Connection& C, const TransitionMap& T) {
  require_same_chart(C.product(), T.source, "transform_christoffels");
  require_valid(T);
  const ChartPtr& Pt = T.target;
  FormalChange change;
  for (auto r : Pt->indices_of(CoordKind::algebroid_odd)) change.target_odd.push_back(Pt->at(r).name);
  for (auto r : Pt->indices_of(CoordKind::fiber)) {
    change.fiber_images.emplace(Pt->at(r).name, T.forward.image(r));
  }
  // xi^j = xi^{i'} T_{i'}^j(x'), pulled back to unprimed coordinates
  for (auto j : C.odd_ranks()) {
    const Expression& back = T.inverse.image(j);
    for (auto ip : Pt->indices_of(CoordKind::algebroid_odd)) {
      Expression coeff = back.derivative(ip);
      if (coeff.depends_on_kind(CoordKind::algebroid_odd) || coeff.depends_on_kind(CoordKind::fiber)) {
        throw DomainError("odd coordinates must transform linearly with base coefficients");
      }
      if (!coeff.is_zero()) change.frame_inverse.emplace(std::pair{Pt->at(ip).name, C.product()->at(j).name}, T.forward.apply(coeff));
    }
  }
  ChristoffelData formal = transform_christoffels_formal(C, change);
  ChristoffelData out;
  for (const auto& [key, e] : formal) {
    Expression g = T.inverse.apply(e);
    if (!g.is_zero()) out[key] = g;
  }
  return out;
}

ChristoffelData conjugated_christoffels(const Connection& C, const TransitionMap& T) {
  require_same_chart(C.product(), T.source, "conjugated_christoffels");
  require_valid(T);
  const ChartPtr& Pt = T.target;
  VectorField X = transport(C.field(), T.forward, T.inverse);
  ChristoffelData out;
  for (auto y : Pt->indices_of(CoordKind::fiber)) {
    for (auto ip : Pt->indices_of(CoordKind::algebroid_odd)) {
      Expression g = X.component(y).derivative(ip);
      if (!g.is_zero()) out[{Pt->at(ip).name, Pt->at(y).name}] = g;
    }
  }
  return out;
}

// ---- gauge group -------------------------------------------------------------

Report validate_gauge(const ChartPtr& product, const TransitionMap& phi) {
  Report r = validate_transition(phi);
  r.title = "gauge element " + phi.name;
  r.add("acts on the product chart", phi.source->same_layout(*product) && phi.target->same_layout(*product));
  std::string moved;
  for (std::size_t z = 0; z < product->size() && moved.empty(); ++z) {
    auto kind = product->at(z).kind;
    if (kind == CoordKind::fiber) continue;
    const auto& name = product->at(z).name;
    Expression id = Expression::coordinate(phi.source, name);
    if (!(phi.forward.image(name) == id) || !(phi.inverse.image(name) == Expression::coordinate(phi.target, name))) {
      moved = name;
    }
  }
  r.add("fixes base and odd coordinates", moved.empty(), moved.empty() ? std::string() : "moves " + moved);
  return r;
}

Connection gauge_transform(const Connection& C, const TransitionMap& phi) {
  Report r = validate_gauge(C.product(), phi);
  for (const auto& c : r.failures()) {
    if (c.name == "fixes base and odd coordinates" || c.name == "acts on the product chart") {
      throw DomainError("gauge-group violation: " + c.name + (c.detail.empty() ? "" : " (" + c.detail + ")"));
    }
  }
  if (!r.passed()) throw PreconditionError("invalid gauge element:\n" + r.str());
  VectorField X = transport(C.field().embed(phi.target), phi.inverse, phi.forward);
  return connection_from_field(C.algebroid(), C.bundle(), X);
}

TransitionMap then(const TransitionMap& phi, const TransitionMap& psi) {
  TransitionMap g = compose(psi, phi);
  g.name = phi.name + ";" + psi.name;
  return g;
}

// ---- splittings ---------------------------------------------------------------

ChristoffelData christoffels_from_blocks(const ChartPtr& P, const LinearBlocks& blocks) {
  ChristoffelData g;
  for (const auto& [key, e] : blocks) {
    const auto& [J, i, I] = key;
    auto jr = P->index(J);
    auto ir = P->index(I);
    if (P->at(jr).kind != CoordKind::fiber || P->at(ir).kind != CoordKind::fiber) {
      throw DomainError("linear block indices must be fiber coordinates");
    }
    if (P->at(jr).weight != P->at(ir).weight) throw GradingError("linear block mixes weights: " + J + " and " + I);
    if (!e.is_base()) throw DomainError("linear block Gamma[" + J + "][" + i + "][" + I + "] must be a base function");
    Expression term = Expression::coordinate(P, jr) * e.embed(P);
    auto it = g.find({i, I});
    if (it == g.end()) g.emplace(std::pair{i, I}, term);
    else it->second += term;
  }
  return g;
}

Connection split_connection(const Algebroid& A, const ChartPtr& split_bundle, const ChristoffelData& gamma) {
  Connection C = assemble(A, split_bundle, gamma);
  const ChartPtr& P = C.product();
  for (const auto& [key, g] : C.christoffels()) {
    auto target = P->index(key.second);
    VectorField none(P);
    for (const auto& t : g.terms()) {
      std::size_t degree = 0;
      bool same_block = true;
      for (const auto& [r, e] : t.mono.evens) {
        if (P->at(r).kind != CoordKind::fiber) continue;
        degree += static_cast<std::size_t>(e);
        if (P->at(r).weight != P->at(target).weight) same_block = false;
      }
      if (degree != 1 || !same_block) {
        throw DomainError("split connection block Gamma[" + key.first + "][" + key.second +
                          "] is not linear in its own weight block: " + g.str());
      }
    }
  }
  return C;
}

Connection unsplit_via_splitting(const Connection& split, const TransitionMap& phi) {
  require_valid(phi);
  for (const auto& c : phi.source->coords()) {
    if (c.kind != CoordKind::base) continue;
    if (!(phi.forward.image(c.name) == Expression::coordinate(phi.source, c.name))) {
      throw DomainError("splitting must act as the identity on base coordinate " + c.name);
    }
  }
  require_same_chart(phi.target, split.bundle(), "unsplit_via_splitting");
  ChartPtr P = product_chart(split.algebroid().chart(), phi.source);
  TransitionMap Phi = lift_to_product(phi, P, split.product());
  VectorField X = transport(split.field(), Phi.inverse, Phi.forward);
  return connection_from_field(split.algebroid(), phi.source, X);
}

TransitionMap splitting_gauge(const ChartPtr& P, const ChartPtr& Ps, const TransitionMap& phi, const TransitionMap& psi) {
  TransitionMap Phi = lift_to_product(phi, P, Ps);
  TransitionMap Psi = lift_to_product(psi, P, Ps);
  TransitionMap g;
  g.name = psi.name + "^-1 o " + phi.name;
  g.source = P;
  g.target = P;
  g.forward = compose(Psi.inverse, Phi.forward);
  g.inverse = compose(Phi.inverse, Psi.forward);
  return g;
}

// ---- truncation ---------------------------------------------------------------

Connection project_truncation(const Connection& C, int l) {
  ChartPtr F = truncate(C.bundle(), l);
  ChartPtr P = product_chart(C.algebroid().chart(), F);
  ChristoffelData g;
  for (const auto& [key, e] : C.christoffels()) {
    if (!F->contains(key.second)) continue;
    for (std::size_t r = 0; r < C.product()->size(); ++r) {
      if (!P->contains(C.product()->at(r).name) && e.depends_on(r)) {
        throw ConsistencyError("Gamma[" + key.first + "][" + key.second + "] depends on dropped coordinate " +
                               C.product()->at(r).name);
      }
    }
    g.emplace(key, e.embed(P));
  }
  return assemble(C.algebroid(), F, g);
}

Report truncation_report(const Connection& C) {
  Report r;
  r.title = "projections of the connection on " + C.bundle()->name();
  const bool flat = is_flat(C);
  VectorField R = curvature(C);
  for (int l = 1; l < C.bundle()->degree(0); ++l) {
    Connection T = project_truncation(C, l);
    VectorField RT = curvature(T);
    // truncate nabla^2 by dropping components of removed fibers
    VectorField cut(T.product());
    for (const auto& [rank, e] : R.components()) {
      const auto& name = C.product()->at(rank).name;
      if (T.product()->contains(name)) cut.set(name, e.embed(T.product()));
    }
    std::string ls = std::to_string(l);
    r.add("l=" + ls + ": truncated curvature equals curvature of truncation", cut == RT);
    if (flat) r.add("l=" + ls + ": flat connection projects to a flat connection", RT.is_zero());
    else r.note("l=" + ls + ": projection flat", RT.is_zero());
  }
  return r;
}

// ---- lifts, curvature tensor, quasi-actions -----------------------------------

namespace {

VectorField iota_on_product(const Connection& C, const Section& u) {
  const ChartPtr& P = C.product();
  VectorField X(P);
  for (std::size_t i = 0; i < C.odd_ranks().size(); ++i) X.set(C.odd_ranks()[i], u.u.at(i).embed(P));
  return X;
}

}  // namespace

VectorField horizontal_lift(const Connection& C, const Section& u) {
  const ChartPtr& P = C.product();
  const ChartPtr& F = C.bundle();
  VectorField B = bracket(C.field(), iota_on_product(C, u));
  VectorField H(F);
  for (const auto& [rank, e] : B.components()) {
    if (P->at(rank).kind == CoordKind::algebroid_odd) continue;
    if (e.depends_on_kind(CoordKind::algebroid_odd)) {
      throw ConsistencyError("[nabla, iota_u] has xi-dependent component along " + P->at(rank).name + ": " + e.str());
    }
    H.set(P->at(rank).name, e.embed(F));
  }
  // local form u^i Q_i^a d_a + u^i Gamma_i^I d_I
  const auto& A = C.algebroid();
  VectorField L(F);
  for (std::size_t a = 0; a < A.base_dim(); ++a) {
    Expression e(F);
    for (std::size_t i = 0; i < A.rank(); ++i) e += u.u[i].embed(F) * A.anchor(i, a).embed(F);
    L.set(A.chart()->at(A.base(a)).name, e);
  }
  for (auto y : C.fiber_ranks()) {
    Expression e(F);
    for (std::size_t i = 0; i < A.rank(); ++i) {
      Expression g = C.gamma(P->at(C.odd_ranks()[i]).name, P->at(y).name);
      if (!g.is_zero()) e += u.u[i].embed(F) * g.embed(F);
    }
    L.set(P->at(y).name, e);
  }
  if (!(L == H)) throw ConsistencyError("horizontal lift disagrees with its local form: " + H.str() + " vs " + L.str());
  return H;
}

VectorField curvature_tensor(const Connection& C, const Section& u, const Section& v) {
  Section uv = derived_bracket(C.algebroid(), u, v);
  return horizontal_lift(C, uv) - bracket(horizontal_lift(C, u), horizontal_lift(C, v));
}

VectorField curvature_contraction(const Connection& C, const Section& u, const Section& v) {
  const ChartPtr& P = C.product();
  const ChartPtr& F = C.bundle();
  VectorField K = curvature(C);
  VectorField R(F);
  const auto& odd = C.odd_ranks();
  for (auto y : C.fiber_ranks()) {
    Expression e(F);
    for (std::size_t i = 0; i < odd.size(); ++i) {
      for (std::size_t j = 0; j < odd.size(); ++j) {
        Expression cij = K.component(y).derivative(odd[i]).derivative(odd[j]);
        if (cij.is_zero()) continue;
        e -= u.u[i].embed(F) * v.u[j].embed(F) * cij.embed(F);
      }
    }
    R.set(P->at(y).name, e);
  }
  return R;
}

Substitution quasi_action(const Connection& C, const Section& u) {
  const ChartPtr& F = C.bundle();
  VectorField H = horizontal_lift(C, u);
  Expression eps = Expression::epsilon(F);
  std::map<std::string, Expression> m;
  for (const auto& [rank, e] : H.components()) {
    m.emplace(F->at(rank).name, Expression::coordinate(F, rank) + eps * e);
  }
  return Substitution::make(F, F, m);
}

QuasiActionReport check_quasi_action(const Connection& C, const Section& u, const Section& v, const Expression& f) {
  QuasiActionReport out;
  Report& r = out.conditions;
  r.title = "quasi-action generated by the connection";
  const auto& A = C.algebroid();
  const ChartPtr& F = C.bundle();
  VectorField Hu = horizontal_lift(C, u);
  auto w = Hu.weight();
  r.add("(1) a(u) has weight zero", Hu.is_zero() || (w && *w == F->zero_weight()));

  std::string proj;
  for (const auto& [rank, e] : Hu.components()) {
    if (F->at(rank).kind == CoordKind::base && !e.is_base()) proj = "component along " + F->at(rank).name + " depends on fibers";
  }
  Expression fF = f.embed(F);
  Expression lhs = Hu.apply(fF);
  Expression rhs = anchor(A, u, f).embed(F);
  if (!(lhs == rhs) && proj.empty()) proj = "a(u)(f) - rho_u(f) = " + (lhs - rhs).str();
  r.add("(2) a(u) projects to rho_u", proj.empty(), proj);

  Section fu;
  for (const auto& e : u.u) fu.u.push_back(f * e);
  VectorField Hfu = horizontal_lift(C, fu);
  VectorField fHu = fF * Hu;
  r.add("(3) a(fu) = f a(u)", Hfu == fHu, Hfu == fHu ? std::string() : (Hfu - fHu).str());

  out.defect = curvature_tensor(C, u, v);
  out.action = out.defect.is_zero();

  // first-order behaviour: f o a_u = f + eps H(u)(f) on every coordinate function
  Substitution a = quasi_action(C, u);
  std::string first;
  for (std::size_t z = 0; z < F->size() && first.empty(); ++z) {
    Expression zc = Expression::coordinate(F, z);
    Expression want = zc + Expression::epsilon(F) * Hu.apply(zc);
    if (!(a.image(z) == want)) first = F->at(z).name;
  }
  r.add("a_u = id + eps H(u) to first order", first.empty(), first);
  return out;
}

ChartPtr antitangent_bundle_chart(const ChartPtr& F, const std::string& name) {
  const std::size_t n = F->gradings() + 1;
  std::vector<CoordinateDescriptor> coords;
  for (const auto& c : F->coords()) {
    Multiweight w = c.weight;
    w.push_back(0);
    coords.push_back({c.name, c.parity, w, c.kind});
    Multiweight dw = c.weight;
    dw.push_back(1);
    auto kind = c.kind == CoordKind::base ? CoordKind::algebroid_odd : CoordKind::fiber;
    coords.push_back({differential_name(c.name), c.parity + Parity::odd, dw, kind});
  }
  return Chart::make(name.empty() ? "PiT" + F->name() : name, n, std::move(coords));
}

Substitution export_h_morphism(const Connection& C) {
  const ChartPtr& P = C.product();
  const ChartPtr& F = C.bundle();
  ChartPtr T = antitangent_bundle_chart(F);
  std::map<std::string, Expression> m;
  for (const auto& c : F->coords()) {
    m.emplace(differential_name(c.name), C.field().component(c.name));
  }
  return Substitution::make(T, P, m);
}

Report check_h_morphism(const Connection& C) {
  Report r;
  r.title = "h_nabla : tau^* Pi A -> Pi T F";
  Substitution h = export_h_morphism(C);
  const auto& A = C.algebroid();
  const ChartPtr& P = C.product();
  ChartPtr TM = antitangent_chart(A.chart());
  Substitution rho = anchor_morphism(A, TM);
  auto bad = h.grading_violations();
  r.add("h_nabla preserves both weights", bad.empty(), bad.empty() ? std::string() : bad.front());
  for (const auto& c : TM->coords()) {
    // (T tau)^Pi keeps x and dx; p_{Pi A} keeps x and xi
    Expression top = h.image(c.name);
    Expression bottom = rho.image(c.name).embed(P);
    r.add("square commutes on " + c.name, top == bottom, top == bottom ? std::string() : (top - bottom).str());
  }
  for (const auto& c : C.bundle()->coords()) {
    if (c.kind != CoordKind::fiber) continue;
    Expression img = h.image(differential_name(c.name));
    Expression want(P);
    for (auto o : C.odd_ranks()) want += Expression::coordinate(P, o) * C.gamma(P->at(o).name, c.name);
    r.add("d" + c.name + " -> xi^i Gamma_i", img == want);
  }
  return r;
}

Report check_connection_morphism(const TransitionMap& Phi, const Connection& src, const Connection& tgt) {
  if (!Phi.source->same_layout(*src.product()) || !Phi.target->same_layout(*tgt.product())) {
    throw DomainError("morphism charts do not match the connection carriers");
  }
  Report r;
  r.title = "morphism of weighted connections " + Phi.name;
  auto bad = Phi.forward.grading_violations();
  r.add("(1),(2) commutes with both homogeneity structures", bad.empty(), bad.empty() ? std::string() : bad.front());
  VectorField X = src.field().embed(Phi.source);
  VectorField Y = tgt.field().embed(Phi.target);
  for (std::size_t z = 0; z < Phi.target->size(); ++z) {
    Expression lhs = X.apply(Phi.forward.image(z));
    Expression rhs = Phi.forward.apply(Y.apply(Expression::coordinate(Phi.target, z)));
    Expression res = lhs - rhs;
    r.add("(3) nabla Phi^* = Phi^* nabla' on " + Phi.target->at(z).name, res.is_zero(), residual_text(res));
  }
  return r;
}

}  // namespace graded
