#include "graded/dvb.hpp"

#include "graded/errors.hpp"

namespace graded {

namespace {

enum class Slot { base, y, z, w, other };

Slot slot_of(const CoordinateDescriptor& c) {
  if (c.weight.size() != 2 || is_odd(c.parity)) return Slot::other;
  const int a = c.weight[0];
  const int b = c.weight[1];
  if (a == 0 && b == 0) return Slot::base;
  if (a == 0 && b == 1) return Slot::y;
  if (a == 1 && b == 0) return Slot::z;
  if (a == 1 && b == 1) return Slot::w;
  return Slot::other;
}

/// Slot of a coordinate on a product chart (the trailing algebroid weight is dropped).
Slot product_slot(const CoordinateDescriptor& c) {
  if (c.kind == CoordKind::algebroid_odd) return Slot::other;
  CoordinateDescriptor d = c;
  d.weight.resize(2);
  return slot_of(d);
}

struct FiberCount {
  int y = 0, z = 0, w = 0, other = 0;
};

FiberCount count_fibers(const Chart& chart, const Monomial& m) {
  FiberCount f;
  for (const auto& [r, e] : m.evens) {
    switch (slot_of(chart.at(r))) {
      case Slot::base: break;
      case Slot::y: f.y += e; break;
      case Slot::z: f.z += e; break;
      case Slot::w: f.w += e; break;
      case Slot::other: f.other += e; break;
    }
  }
  f.other += static_cast<int>(m.odds.size()) + (m.eps ? 1 : 0);
  return f;
}

bool term_has_shape(Slot s, const FiberCount& f) {
  if (f.other) return false;
  switch (s) {
    case Slot::base: return f.y == 0 && f.z == 0 && f.w == 0;
    case Slot::y: return f.y == 1 && f.z == 0 && f.w == 0;
    case Slot::z: return f.y == 0 && f.z == 1 && f.w == 0;
    case Slot::w: return (f.w == 1 && f.y == 0 && f.z == 0) || (f.w == 0 && f.y == 1 && f.z == 1);
    case Slot::other: return false;
  }
  return false;
}

std::string shape_violation(const Substitution& s) {
  for (std::size_t r = 0; r < s.from()->size(); ++r) {
    Slot slot = slot_of(s.from()->at(r));
    for (const auto& t : s.image(r).terms()) {
      if (!term_has_shape(slot, count_fibers(*s.to(), t.mono))) {
        return s.from()->at(r).name + "' has term " + Expression::term_string(s.to(), t, true);
      }
    }
  }
  return {};
}

void require_dvb(const ChartPtr& c) {
  Report r = check_dvb_shape(c);
  if (!r.passed()) throw GradingError("not a double vector bundle chart:\n" + r.str());
}

ChartPtr side_chart(const ChartPtr& dvb, Slot keep, const std::string& name) {
  ChartBuilder b(name, 1);
  for (const auto& c : dvb->coords()) {
    Slot s = slot_of(c);
    if (s == Slot::base) b.base(c.name);
    else if (s == keep) b.fiber(c.name, {1});
  }
  return b.build();
}

/// e with every term containing coordinate `rank` removed.
Expression drop_coordinate(const Expression& e, std::size_t rank) {
  std::vector<Term> keep;
  for (const auto& t : e.terms()) {
    bool hit = false;
    for (const auto& [r, p] : t.mono.evens) hit = hit || r == rank;
    if (!hit) keep.push_back(t);
  }
  return Expression::from_terms(e.chart(), std::move(keep));
}

}  // namespace

ChartPtr dvb_chart(const std::string& name, const std::vector<std::string>& base, const std::vector<std::string>& y,
                   const std::vector<std::string>& z, const std::vector<std::string>& w) {
  ChartBuilder b(name, 2);
  for (const auto& n : base) b.base(n);
  for (const auto& n : y) b.fiber(n, {0, 1});
  for (const auto& n : z) b.fiber(n, {1, 0});
  for (const auto& n : w) b.fiber(n, {1, 1});
  return b.build();
}

Report check_dvb_shape(const ChartPtr& chart) {
  Report r;
  r.title = "double vector bundle chart " + chart->name();
  const bool two = chart->gradings() == 2;
  r.add("two gradings", two, two ? std::string() : "found " + std::to_string(chart->gradings()));
  std::string bad;
  for (const auto& c : chart->coords()) {
    if (slot_of(c) == Slot::other && bad.empty()) bad = c.name + " has " + to_string(c.parity) + " weight " + to_string(c.weight);
  }
  r.add("weights in {0,1}, even coordinates", bad.empty(), bad);
  return r;
}

Report validate_dvb_chart(const TransitionMap& T) {
  if (!T.has_inverse()) throw IncompleteMap("transition " + T.name + " has no inverse");
  Report r;
  r.title = "DVB transition " + T.name;
  r.merge(check_dvb_shape(T.source), "source: ");
  r.merge(check_dvb_shape(T.target), "target: ");
  if (!r.passed()) return r;
  r.merge(validate_transition(T));
  std::string f = shape_violation(T.forward);
  r.add("forward has the admissible shape", f.empty(), f);
  std::string i = shape_violation(T.inverse);
  r.add("inverse has the admissible shape", i.empty(), i);
  r.merge(check_homogeneity_structure(T.source), "source: ");
  return r;
}

Connection assemble_biweighted(const Algebroid& A, const ChartPtr& dvb, const DVBBlocks& blocks) {
  require_dvb(dvb);
  ChartPtr P = product_chart(A.chart(), dvb);
  auto expect = [&](const std::string& name, Slot s, const char* what) {
    auto r = P->find(name);
    if (!r || product_slot(P->at(*r)) != s) throw GradingError(std::string(what) + " index '" + name + "' has the wrong bi-weight");
  };
  for (const auto& [k, e] : blocks.e1) {
    expect(std::get<0>(k), Slot::y, "E1 block");
    expect(std::get<2>(k), Slot::y, "E1 block");
  }
  for (const auto& [k, e] : blocks.e2) {
    expect(std::get<0>(k), Slot::z, "E2 block");
    expect(std::get<2>(k), Slot::z, "E2 block");
  }
  for (const auto& [k, e] : blocks.core) {
    expect(std::get<0>(k), Slot::w, "core block");
    expect(std::get<2>(k), Slot::w, "core block");
  }
  ChristoffelData g;
  for (const auto* part : {&blocks.e1, &blocks.e2, &blocks.core}) {
    for (auto& [k, e] : christoffels_from_blocks(P, *part)) {
      auto it = g.find(k);
      if (it == g.end()) g.emplace(k, e);
      else it->second += e;
    }
  }
  for (const auto& [k, e] : blocks.cross) {
    const auto& [alpha, mu, i, m] = k;
    expect(alpha, Slot::y, "cross block");
    expect(mu, Slot::z, "cross block");
    expect(m, Slot::w, "cross block");
    if (!e.is_base()) throw DomainError("cross block must be a base function");
    Expression term = Expression::coordinate(P, mu) * Expression::coordinate(P, alpha) * e.embed(P);
    auto it = g.find({i, m});
    if (it == g.end()) g.emplace(std::pair{i, m}, term);
    else it->second += term;
  }
  return assemble(A, dvb, g);
}

DVBBlocks extract_blocks(const Connection& C) {
  require_dvb(C.bundle());
  const ChartPtr& P = C.product();
  const ChartPtr& M = C.algebroid().chart();
  DVBBlocks out;
  std::vector<std::size_t> ys, zs, ws;
  for (auto r : C.fiber_ranks()) {
    switch (product_slot(P->at(r))) {
      case Slot::y: ys.push_back(r); break;
      case Slot::z: zs.push_back(r); break;
      case Slot::w: ws.push_back(r); break;
      default: break;
    }
  }
  auto linear = [&](std::size_t I, const std::vector<std::size_t>& from, LinearBlocks& into, bool with_cross) {
    for (auto o : C.odd_ranks()) {
      const auto& on = P->at(o).name;
      Expression g = C.gamma(on, P->at(I).name);
      Expression rebuilt(P);
      for (auto J : from) {
        Expression c = g.derivative(J);
        if (c.is_zero()) continue;
        if (c.depends_on_kind(CoordKind::fiber)) throw ConsistencyError("Gamma[" + on + "][" + P->at(I).name + "] is not linear: " + g.str());
        into.emplace(std::tuple{P->at(J).name, on, P->at(I).name}, c.embed(M));
        rebuilt += Expression::coordinate(P, J) * c;
      }
      if (with_cross) {
        for (auto a : ys) {
          for (auto m : zs) {
            Expression c = g.derivative(m).derivative(a);
            if (c.is_zero()) continue;
            if (c.depends_on_kind(CoordKind::fiber)) throw ConsistencyError("Gamma[" + on + "][" + P->at(I).name + "] is not bilinear: " + g.str());
            out.cross.emplace(std::tuple{P->at(a).name, P->at(m).name, on, P->at(I).name}, c.embed(M));
            rebuilt += Expression::coordinate(P, m) * Expression::coordinate(P, a) * c;
          }
        }
      }
      if (!(rebuilt == g)) {
        throw ConsistencyError("Gamma[" + on + "][" + P->at(I).name + "] is not of double vector bundle form: " + g.str());
      }
    }
  };
  for (auto I : ys) linear(I, ys, out.e1, false);
  for (auto I : zs) linear(I, zs, out.e2, false);
  for (auto I : ws) linear(I, ws, out.core, true);
  return out;
}

DVBProjections project_sides_core(const Connection& C) {
  DVBBlocks b = extract_blocks(C);
  const auto& A = C.algebroid();
  auto build = [&](Slot s, const std::string& name, const LinearBlocks& blocks) {
    ChartPtr E = side_chart(C.bundle(), s, name);
    ChartPtr P = product_chart(A.chart(), E);
    return assemble(A, E, christoffels_from_blocks(P, blocks));
  };
  DVBProjections out{build(Slot::y, "E1", b.e1), build(Slot::z, "E2", b.e2), build(Slot::w, "C", b.core), {}};
  Report& r = out.report;
  r.title = "side and core projections of the connection on " + C.bundle()->name();

  // curvature of each projection against the matching part of nabla^2
  VectorField R = curvature(C);
  const bool flat = R.is_zero();
  auto compare = [&](const Connection& E, const std::string& label, bool core) {
    VectorField part(E.product());
    for (const auto& [rank, e] : R.components()) {
      const auto& name = C.product()->at(rank).name;
      if (!E.product()->contains(name)) continue;
      Expression v = e;
      // on the core only the w-linear part survives z = y = 0
      if (core) {
        for (auto f : C.fiber_ranks()) {
          Slot s = product_slot(C.product()->at(f));
          if (s == Slot::y || s == Slot::z) v = drop_coordinate(v, f);
        }
      }
      part.set(name, v.embed(E.product()));
    }
    VectorField RE = curvature(E);
    r.add(label + ": curvature equals the induced part of nabla^2", part == RE);
    if (flat) r.add(label + ": flat connection induces a flat connection", RE.is_zero());
    else r.note(label + ": flat", RE.is_zero());
  };
  compare(out.e1, "E1", false);
  compare(out.e2, "E2", false);
  compare(out.core, "C", true);
  return out;
}

TransitionMap dvb_splitting(const ChartPtr& dvb, const ChartPtr& split,
                            const std::map<std::tuple<std::string, std::string, std::string>, Expression>& S) {
  require_dvb(dvb);
  require_dvb(split);
  std::map<std::string, Expression> fwd, inv;
  for (const auto& [k, e] : S) {
    const auto& [alpha, mu, m] = k;
    if (!e.is_base()) throw DomainError("splitting block must be a base function");
    Expression f = Expression::coordinate(dvb, mu) * Expression::coordinate(dvb, alpha) * e.embed(dvb);
    Expression b = Expression::coordinate(split, mu) * Expression::coordinate(split, alpha) * e.embed(split);
    auto it = fwd.find(m);
    if (it == fwd.end()) {
      fwd.emplace(m, Expression::coordinate(dvb, m) + f);
      inv.emplace(m, Expression::coordinate(split, m) - b);
    } else {
      it->second += f;
      inv.at(m) -= b;
    }
  }
  return TransitionMap::make("split", dvb, split, fwd, inv);
}

Connection split_existence_dvb(const Algebroid& A, const DVBBlocks& split_blocks, const TransitionMap& phi) {
  if (!split_blocks.cross.empty()) throw DomainError("the split connection must be block diagonal");
  Report r = validate_dvb_chart(phi);
  if (!r.passed()) throw PreconditionError("invalid splitting:\n" + r.str());
  Connection split = assemble_biweighted(A, phi.target, split_blocks);
  Connection C = unsplit_via_splitting(split, phi);
  extract_blocks(C);
  return C;
}

Report check_biweighted_action(const Connection& C, const Section& u) {
  Report r;
  r.title = "bi-grading of the quasi-action";
  Substitution a = quasi_action(C, u);
  const ChartPtr& D = C.bundle();
  for (std::size_t z = 0; z < D->size(); ++z) {
    const Expression& img = a.image(z);
    auto g = img.grade();
    bool ok = g && g->parity == D->at(z).parity && g->weight == D->at(z).weight;
    r.add(D->at(z).name + " keeps bi-weight " + to_string(D->at(z).weight), ok,
          ok ? std::string() : img.str());
  }
  return r;
}

}  // namespace graded
