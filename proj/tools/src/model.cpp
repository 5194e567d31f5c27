#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "graded/constructions.hpp"
#include "graded/dvb.hpp"
#include "graded/errors.hpp"
#include "graded/manifest/executor.hpp"
#include "graded/random.hpp"

namespace graded::manifest {

namespace {

std::string grade_text(const Grade& g) { return graded::to_string(g.weight) + (is_odd(g.parity) ? " odd" : ""); }

std::string index_text(const Assignment& a) {
  std::string s = a.head;
  for (const auto& idx : a.indices) {
    s += '[';
    for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + idx[i];
    s += ']';
  }
  return s;
}

/// "x_3" -> ("x", 3); nullopt without a positive numeric suffix.
std::optional<std::pair<std::string, int>> split_lifted(const std::string& s) {
  auto u = s.rfind('_');
  if (u == std::string::npos || u == 0 || u + 1 == s.size() || s.size() - u > 4) return std::nullopt;
  for (std::size_t i = u + 1; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
  }
  int n = std::stoi(s.substr(u + 1));
  if (n < 1) return std::nullopt;
  return std::pair{s.substr(0, u), n};
}

}  // namespace

struct Object {
  const Decl* decl = nullptr;
  ChartPtr chart;
  std::optional<TransitionMap> transition;
  std::optional<Algebroid> algebroid;
  std::optional<PoissonStructure> poisson;
  std::optional<CotangentAlgebroid> cotangent;
  std::optional<Connection> connection;
  std::string owner;  // gauge: connection name; section: algebroid name
  std::optional<Section> section;

  // constructions
  std::optional<AffineConnectionData> g, h;
  std::vector<TransitionMap> changes;
  std::optional<T2MConstruction> t2m;
  std::optional<PoissonConnection> pc;
  std::map<std::string, Expression> omega;
  std::optional<DVBBlocks> dvb;
  Report report;
  bool has_report = false;

  std::string failure;  // mathematical failure raised while building
};

class Model {
 public:
  explicit Model(Manifest m) : m_(std::move(m)) {
    for (const auto& d : m_.decls) declare(d);
  }

  const Manifest& manifest() const { return m_; }

  CommandResult execute(const Command& c) const;
  std::vector<CommandResult> run(std::string_view verb) const;
  std::vector<CommandResult> properties(std::uint64_t seed, int trials) const;

 private:
  // ---- declarations ---------------------------------------------------------

  const Object& lookup(const std::string& name, const Location& loc, std::initializer_list<Decl::Kind> kinds,
                       const char* what) const {
    auto it = objects_.find(name);
    if (it == objects_.end()) throw InputError(loc, "unknown name '" + name + "'");
    const Object& o = it->second;
    if (std::find(kinds.begin(), kinds.end(), o.decl->kind) == kinds.end()) {
      throw InputError(loc, "'" + name + "' is a " + to_string(o.decl->kind) + ", expected " + what);
    }
    return o;
  }

  const Object& chart_object(const std::string& name, const Location& loc) const {
    return lookup(name, loc, {Decl::Kind::chart}, "a chart");
  }

  /// Algebroid or the cotangent algebroid of a Poisson structure.
  const Algebroid* algebroid_of(const Object& o) const {
    if (o.algebroid) return &*o.algebroid;
    if (o.cotangent) return &o.cotangent->algebroid;
    return nullptr;
  }
  const Object& algebroid_object(const std::string& name, const Location& loc) const {
    return lookup(name, loc, {Decl::Kind::algebroid, Decl::Kind::poisson}, "an algebroid");
  }

  const Connection* connection_of(const Object& o) const { return o.connection ? &*o.connection : nullptr; }
  const Object& connection_object(const std::string& name, const Location& loc) const {
    return lookup(name, loc, {Decl::Kind::connection, Decl::Kind::splitting, Decl::Kind::construction}, "a connection");
  }

  ChartPtr resolve_chart(const ChartRef& r) const {
    if (r.second.empty()) {
      const Object& o = lookup(r.first, r.loc, {Decl::Kind::chart, Decl::Kind::algebroid, Decl::Kind::poisson}, "a chart");
      if (o.chart) return o.chart;
      throw InputError(r.loc, "'" + r.first + "' has no chart");
    }
    const Object& a = algebroid_object(r.first, r.loc);
    const Object& f = chart_object(r.second, r.loc);
    return product_chart(a.chart, f.chart);
  }

  Expression eval(const Expr& e, const ChartPtr& chart) const {
    switch (e.kind) {
      case Expr::Kind::number: return Expression::constant(chart, Rational(e.text));
      case Expr::Kind::name:
        if (chart->contains(e.text)) return Expression::coordinate(chart, e.text);
        if (e.text == kEpsilonName) return Expression::epsilon(chart);
        if (functions_.count(e.text)) throw InputError(e.loc, "function '" + e.text + "' needs an argument list");
        throw InputError(e.loc, "unknown coordinate '" + e.text + "' on chart " + chart->name());
      case Expr::Kind::call: {
        auto it = functions_.find(e.text);
        if (it == functions_.end()) throw InputError(e.loc, "unknown function '" + e.text + "'");
        if (e.args.size() != it->second) {
          throw InputError(e.loc, "function '" + e.text + "' takes " + std::to_string(it->second) + " arguments, " +
                                      std::to_string(e.args.size()) + " given");
        }
        if (!e.deriv.empty() && e.deriv.size() != it->second) {
          throw InputError(e.loc, "derivative orders of '" + e.text + "' must list one order per argument");
        }
        std::vector<Expression> args;
        for (const auto& a : e.args) {
          Expression v = eval(a, chart);
          if (!v.is_base() || v.has_epsilon()) throw InputError(a.loc, "function arguments must be base expressions");
          args.push_back(std::move(v));
        }
        return Expression::function(chart, e.text, std::move(args), e.deriv);
      }
      case Expr::Kind::negate: return -eval(e.args[0], chart);
      case Expr::Kind::add: return eval(e.args[0], chart) + eval(e.args[1], chart);
      case Expr::Kind::sub: return eval(e.args[0], chart) - eval(e.args[1], chart);
      case Expr::Kind::mul: return eval(e.args[0], chart) * eval(e.args[1], chart);
      case Expr::Kind::div: {
        Expression d = eval(e.args[1], chart);
        auto c = d.as_constant();
        if (!c) throw InputError(e.loc, "division by a non-constant expression");
        if (*c == 0) throw InputError(e.loc, "division by zero");
        return eval(e.args[0], chart) * (Rational(1) / *c);
      }
      case Expr::Kind::pow: {
        if (e.text.size() > 3 || std::stoi(e.text) > 64) throw InputError(e.loc, "exponent " + e.text + " is too large");
        return eval(e.args[0], chart).pow(std::stoi(e.text));
      }
    }
    throw InputError(e.loc, "bad expression");
  }

  Expression eval_base(const Assignment& a, const ChartPtr& chart) const {
    Expression v = eval(a.value, chart);
    if (!v.is_base() || v.has_epsilon()) throw InputError(a.value.loc, index_text(a) + " must be a base function");
    return v;
  }

  /// Right-hand side with the parity and weight of coordinate `name` of `grade_chart`.
  void require_grade(const Assignment& a, const Expression& v, const ChartPtr& grade_chart, const std::string& name) const {
    if (v.is_zero()) return;
    auto g = v.grade();
    if (!g) throw InputError(a.value.loc, "right-hand side of " + index_text(a) + " is not homogeneous");
    const auto& c = grade_chart->at(grade_chart->index(name));
    if (g->parity != c.parity || !same_padded_weight(g->weight, c.weight)) {
      throw InputError(a.value.loc, "weight mismatch: " + index_text(a) + " needs " + grade_text({c.parity, c.weight}) +
                                        ", the right-hand side has " + grade_text(*g));
    }
  }

  void require_indices(const Assignment& a, const std::string& head, std::size_t n) const {
    if (a.head != head || a.indices.size() != n) {
      throw InputError(a.loc, "expected " + head + std::string(n == 0 ? "" : "[...]") + " with " + std::to_string(n) +
                                  " indices, found " + index_text(a));
    }
    for (const auto& idx : a.indices) {
      if (idx.size() != 1) throw InputError(a.loc, "index lists are only allowed in T^kM blocks");
    }
  }

  void require_coord(const Assignment& a, const ChartPtr& chart, const std::string& name, CoordKind kind,
                     const char* what) const {
    auto r = chart->find(name);
    if (!r || chart->at(*r).kind != kind) {
      throw InputError(a.loc, "'" + name + "' is not " + std::string(what) + " of chart " + chart->name());
    }
  }

  std::map<std::string, Expression> images(const std::vector<Assignment>& body, const ChartPtr& on,
                                           const ChartPtr& assigned) const {
    std::map<std::string, Expression> out;
    for (const auto& a : body) {
      if (!a.indices.empty()) throw InputError(a.loc, "expected a coordinate name on the left");
      if (!assigned->contains(a.head)) {
        throw InputError(a.loc, "unknown coordinate '" + a.head + "' on chart " + assigned->name());
      }
      if (out.count(a.head)) throw InputError(a.loc, "coordinate '" + a.head + "' assigned twice");
      Expression v = eval(a.value, on);
      require_grade(a, v, assigned, a.head);
      out.emplace(a.head, std::move(v));
    }
    return out;
  }

  template <class F>
  void guarded(const Decl& d, Object& o, F&& build) {
    try {
      build();
    } catch (const InputError&) {
      throw;
    } catch (const PreconditionError& e) {
      o.failure = e.what();
    } catch (const ConsistencyError& e) {
      o.failure = e.what();
    } catch (const Error& e) {
      throw InputError(d.loc, std::string(to_string(d.kind)) + " '" + d.name + "': " + e.what());
    }
  }

  /// Propagates a dependency's failure; true when the dependency is usable.
  bool usable(Object& o, const Object& dep) {
    if (dep.failure.empty()) return true;
    o.failure = "depends on '" + dep.decl->name + "': " + dep.failure;
    return false;
  }

  void declare(const Decl& d) {
    if (auto it = objects_.find(d.name); it != objects_.end()) {
      throw InputError(d.loc, "duplicate definition of '" + d.name + "' (first defined at " +
                                  to_string(it->second.decl->loc) + ")");
    }
    if (d.kind == Decl::Kind::function && d.name == kEpsilonName) throw InputError(d.loc, "'eps' is reserved");
    Object o;
    o.decl = &d;
    switch (d.kind) {
      case Decl::Kind::chart: declare_chart(d, o); break;
      case Decl::Kind::function: {
        std::set<std::string> seen;
        for (const auto& p : d.params) {
          if (!seen.insert(p).second) throw InputError(d.loc, "repeated parameter '" + p + "'");
        }
        functions_.emplace(d.name, d.params.size());
        break;
      }
      case Decl::Kind::transition: declare_transition(d, o); break;
      case Decl::Kind::algebroid: declare_algebroid(d, o); break;
      case Decl::Kind::poisson: declare_poisson(d, o); break;
      case Decl::Kind::connection: declare_connection(d, o); break;
      case Decl::Kind::splitting: declare_splitting(d, o); break;
      case Decl::Kind::gauge: declare_gauge(d, o); break;
      case Decl::Kind::section: declare_section(d, o); break;
      case Decl::Kind::construction: declare_construction(d, o); break;
    }
    objects_.emplace(d.name, std::move(o));
  }

  void declare_chart(const Decl& d, Object& o) {
    if (d.coords.empty()) throw InputError(d.loc, "chart '" + d.name + "' has no coordinates");
    std::size_t gradings = 0;
    for (const auto& c : d.coords) {
      if (c.param) continue;
      if (gradings == 0) gradings = c.weight.size();
      if (c.weight.size() != gradings) {
        throw InputError(c.loc, "coordinate '" + c.name + "' has " + std::to_string(c.weight.size()) +
                                    " weights, earlier coordinates have " + std::to_string(gradings));
      }
      for (int w : c.weight) {
        if (w < 0) throw InputError(c.loc, "negative weight");
      }
    }
    ChartBuilder b(d.name, gradings == 0 ? 1 : gradings);
    std::set<std::string> seen;
    for (const auto& c : d.coords) {
      if (!seen.insert(c.name).second) throw InputError(c.loc, "duplicate coordinate '" + c.name + "'");
      if (c.name == kEpsilonName) throw InputError(c.loc, "'eps' is reserved");
      if (c.param) b.parameter(c.name);
      else b.add(CoordinateDescriptor::inferred(c.name, c.weight, c.odd ? Parity::odd : Parity::even));
    }
    guarded(d, o, [&] { o.chart = b.build(); });
  }

  void declare_transition(const Decl& d, Object& o) {
    ChartPtr s = resolve_chart(d.source);
    ChartPtr t = resolve_chart(d.target);
    if (s->size() != t->size()) {
      throw InputError(d.target.loc, "charts " + s->name() + " and " + t->name() + " have different sizes");
    }
    auto fwd = images(d.body, s, t);
    std::map<std::string, Expression> inv;
    if (d.has_inverse) inv = images(d.inverse, t, s);
    guarded(d, o, [&] {
      o.transition = d.has_inverse ? TransitionMap::make(d.name, s, t, fwd, inv)
                                   : TransitionMap::forward_only(d.name, s, t, fwd);
    });
  }

  void declare_algebroid(const Decl& d, Object& o) {
    const Object& c = chart_object(d.refs.at(0), d.ref_locs.at(0));
    if (d.form == "tangent") {
      for (const auto& x : c.chart->coords()) {
        if (x.kind != CoordKind::base) {
          throw InputError(d.ref_locs.at(0), "tangent algebroids need a base chart; '" + x.name + "' is not a base coordinate");
        }
      }
      guarded(d, o, [&] {
        o.algebroid = tangent_algebroid(c.chart->names_of(CoordKind::base));
        o.chart = o.algebroid->chart();
      });
      return;
    }
    AlgebroidSpec spec;
    spec.chart = c.chart;
    for (const auto& a : d.body) {
      if (a.head != "Q" || (a.indices.size() != 2 && a.indices.size() != 3)) {
        throw InputError(a.loc, "expected Q[i][a] or Q[i][j][k], found " + index_text(a));
      }
      require_indices(a, "Q", a.indices.size());
      const auto& i = a.indices[0][0];
      require_coord(a, c.chart, i, CoordKind::algebroid_odd, "an odd coordinate");
      Expression v = eval_base(a, c.chart);
      if (a.indices.size() == 2) {
        require_coord(a, c.chart, a.indices[1][0], CoordKind::base, "a base coordinate");
        if (!spec.anchor.emplace(std::pair{i, a.indices[1][0]}, v).second) throw InputError(a.loc, index_text(a) + " given twice");
      } else {
        require_coord(a, c.chart, a.indices[1][0], CoordKind::algebroid_odd, "an odd coordinate");
        require_coord(a, c.chart, a.indices[2][0], CoordKind::algebroid_odd, "an odd coordinate");
        if (!spec.structure.emplace(std::tuple{i, a.indices[1][0], a.indices[2][0]}, v).second) {
          throw InputError(a.loc, index_text(a) + " given twice");
        }
      }
    }
    guarded(d, o, [&] {
      o.algebroid = Algebroid::make(spec);
      o.chart = c.chart;
    });
  }

  void declare_poisson(const Decl& d, Object& o) {
    const Object& c = chart_object(d.refs.at(0), d.ref_locs.at(0));
    auto base = c.chart->names_of(CoordKind::base);
    if (base.size() != c.chart->size()) throw InputError(d.ref_locs.at(0), "Poisson structures live over a base chart");
    ChartPtr star = anticotangent_chart(base, "PiT*" + c.chart->name());
    std::map<std::pair<std::string, std::string>, Expression> entries;
    for (const auto& a : d.body) {
      require_indices(a, "P", 2);
      for (const auto& idx : a.indices) require_coord(a, star, idx[0], CoordKind::base, "a base coordinate");
      if (!entries.emplace(std::pair{a.indices[0][0], a.indices[1][0]}, eval_base(a, star)).second) {
        throw InputError(a.loc, index_text(a) + " given twice");
      }
    }
    o.chart = star;
    guarded(d, o, [&] {
      o.poisson = PoissonStructure::make(star, entries);
      o.cotangent = cotangent_algebroid(*o.poisson);
    });
  }

  ChristoffelData gammas(const Decl& d, const ChartPtr& A, const ChartPtr& P) const {
    ChristoffelData g;
    for (const auto& a : d.body) {
      require_indices(a, "Gamma", 2);
      require_coord(a, A, a.indices[0][0], CoordKind::algebroid_odd, "an odd coordinate");
      require_coord(a, P, a.indices[1][0], CoordKind::fiber, "a fiber coordinate");
      Expression v = eval(a.value, P);
      require_grade(a, v, P, a.indices[1][0]);
      if (!g.emplace(std::pair{a.indices[0][0], a.indices[1][0]}, v).second) throw InputError(a.loc, index_text(a) + " given twice");
    }
    return g;
  }

  void declare_connection(const Decl& d, Object& o) {
    const Object& a = algebroid_object(d.refs.at(0), d.ref_locs.at(0));
    const Object& f = chart_object(d.refs.at(1), d.ref_locs.at(1));
    ChartPtr P;
    try {
      P = product_chart(a.chart, f.chart);
    } catch (const Error& e) {
      throw InputError(d.loc, e.what());
    }
    ChristoffelData g = gammas(d, a.chart, P);
    if (!usable(o, a)) return;
    guarded(d, o, [&] { o.connection = assemble(algebroid_of(a)->verify(), f.chart, g); });
  }

  void declare_splitting(const Decl& d, Object& o) {
    const Object& t = lookup(d.refs.at(0), d.ref_locs.at(0), {Decl::Kind::transition}, "a transition");
    const Object& c = connection_object(d.refs.at(1), d.ref_locs.at(1));
    if (!usable(o, t) || !usable(o, c)) return;
    guarded(d, o, [&] {
      const Connection& split = *c.connection;
      Connection checked = split_connection(split.algebroid(), split.bundle(), split.christoffels());
      o.transition = t.transition;
      o.connection = unsplit_via_splitting(checked, *t.transition);
    });
  }

  void declare_gauge(const Decl& d, Object& o) {
    const Object& c = connection_object(d.refs.at(0), d.ref_locs.at(0));
    o.owner = d.refs.at(0);
    if (!usable(o, c)) return;
    const ChartPtr& P = c.connection->product();
    auto fwd = images(d.body, P, P);
    std::map<std::string, Expression> inv;
    if (d.has_inverse) inv = images(d.inverse, P, P);
    guarded(d, o, [&] {
      o.transition = d.has_inverse ? TransitionMap::make(d.name, P, P, fwd, inv) : TransitionMap::forward_only(d.name, P, P, fwd);
    });
  }

  void declare_section(const Decl& d, Object& o) {
    const Object& a = algebroid_object(d.refs.at(0), d.ref_locs.at(0));
    o.owner = d.refs.at(0);
    std::map<std::string, Expression> comps;
    for (const auto& s : d.body) {
      require_indices(s, "u", 1);
      require_coord(s, a.chart, s.indices[0][0], CoordKind::algebroid_odd, "an odd coordinate");
      if (!comps.emplace(s.indices[0][0], eval_base(s, a.chart)).second) throw InputError(s.loc, index_text(s) + " given twice");
    }
    if (!usable(o, a)) return;
    guarded(d, o, [&] { o.section = make_section(*algebroid_of(a), comps); });
  }

  void require_args(const Decl& d, std::size_t n) const {
    if (d.refs.size() != n) {
      throw InputError(d.loc, "construction " + d.form + " takes " + std::to_string(n) + " arguments, " +
                                  std::to_string(d.refs.size()) + " given");
    }
  }

  void declare_construction(const Decl& d, Object& o) {
    if (d.form != "t2m" && !d.changes.empty()) throw InputError(d.change_locs[0], "'change' is only used by t2m");
    if (d.form == "t2m") return declare_t2m(d, o);
    if (d.form == "poisson") return declare_poisson_construction(d, o);
    if (d.form == "tkm") return declare_tkm(d, o);
    if (d.form == "dvb") return declare_dvb(d, o);
    throw InputError(d.loc, "unknown construction '" + d.form + "' (expected t2m, poisson, tkm or dvb)");
  }

  void declare_t2m(const Decl& d, Object& o) {
    require_args(d, 1);
    const Object& c = chart_object(d.refs[0], d.ref_locs[0]);
    const ChartPtr& M = c.chart;
    if (M->names_of(CoordKind::base).size() != M->size()) throw InputError(d.ref_locs[0], "t2m needs a base chart");
    std::map<std::string, std::map<std::tuple<std::string, std::string, std::string>, Expression>> entries;
    for (const auto& a : d.body) {
      if (a.head != "G" && a.head != "H") throw InputError(a.loc, "expected G[c][a][b] or H[c][a][b], found " + index_text(a));
      require_indices(a, a.head, 3);
      for (const auto& idx : a.indices) require_coord(a, M, idx[0], CoordKind::base, "a base coordinate");
      auto key = std::tuple{a.indices[0][0], a.indices[1][0], a.indices[2][0]};
      if (!entries[a.head].emplace(key, eval_base(a, M)).second) throw InputError(a.loc, index_text(a) + " given twice");
    }
    for (std::size_t i = 0; i < d.changes.size(); ++i) {
      const Object& t = lookup(d.changes[i], d.change_locs[i], {Decl::Kind::transition}, "a transition");
      if (!compatible(t.transition->source, M)) {
        throw InputError(d.change_locs[i], "base change '" + d.changes[i] + "' does not start on chart " + M->name());
      }
      o.changes.push_back(*t.transition);
    }
    guarded(d, o, [&] {
      o.g = AffineConnectionData::make(M, entries["G"]);
      if (entries.count("H")) o.h = AffineConnectionData::make(M, entries["H"]);
      Algebroid A = tangent_algebroid(M->names_of(CoordKind::base));
      o.t2m = canonical_t2m_connection(*o.g, levi_civita_block(*o.g, A), A);
      o.connection = o.t2m->nabla;
    });
    if (!o.failure.empty()) return;
    guarded(d, o, [&] {
      o.report = t2m_levi_civita_report(*o.g);
      o.report.title = "t2m construction " + d.name;
      for (const auto& bc : o.changes) o.report.merge(t2m_splitting_well_defined(*o.g, bc), "change " + bc.name + ": ");
      if (o.h) {
        Algebroid A = o.connection->algebroid();
        o.report.merge(t2m_gauge_equivalence(*o.g, *o.h, levi_civita_block(*o.g, A), A), "G vs H: ");
      }
      o.has_report = true;
    });
  }

  void declare_poisson_construction(const Decl& d, Object& o) {
    require_args(d, 2);
    const Object& p = lookup(d.refs[0], d.ref_locs[0], {Decl::Kind::poisson}, "a Poisson structure");
    const Object& f = chart_object(d.refs[1], d.ref_locs[1]);
    ChartPtr P;
    try {
      P = product_chart(p.chart, f.chart);
    } catch (const Error& e) {
      throw InputError(d.loc, e.what());
    }
    std::map<std::pair<std::string, std::string>, Expression> gamma;
    for (const auto& a : d.body) {
      if (a.head == "omega") {
        require_indices(a, "omega", 1);
        require_coord(a, p.chart, a.indices[0][0], CoordKind::base, "a base coordinate");
        if (!o.omega.emplace(a.indices[0][0], eval_base(a, p.chart)).second) throw InputError(a.loc, index_text(a) + " given twice");
        continue;
      }
      if (a.head != "Gamma") throw InputError(a.loc, "expected Gamma[a][I] or omega[a], found " + index_text(a));
      require_indices(a, "Gamma", 2);
      require_coord(a, p.chart, a.indices[0][0], CoordKind::base, "a base coordinate");
      require_coord(a, P, a.indices[1][0], CoordKind::fiber, "a fiber coordinate");
      Expression v = eval(a.value, P);
      const auto& fc = P->at(P->index(a.indices[1][0]));
      if (!v.is_zero()) {
        // Gamma^{Ia} x*_a has the weight of y^I
        auto g = v.grade();
        Multiweight want = fc.weight;
        want.back() = 0;
        if (!g || is_odd(g->parity) || !same_padded_weight(g->weight, want)) {
          throw InputError(a.value.loc, "weight mismatch: " + index_text(a) + " needs weight " + graded::to_string(want));
        }
      }
      if (!gamma.emplace(std::pair{a.indices[0][0], a.indices[1][0]}, v).second) throw InputError(a.loc, index_text(a) + " given twice");
    }
    if (!usable(o, p)) return;
    guarded(d, o, [&] {
      o.pc = poisson_contravariant(*p.poisson, f.chart, gamma);
      o.connection = o.pc->nabla;
      o.report = o.pc->report;
      if (!o.omega.empty()) o.report.merge(poisson_action(*o.pc, o.omega).report, "one-form action: ");
      o.report.title = "poisson construction " + d.name;
      o.has_report = true;
    });
  }

  void declare_tkm(const Decl& d, Object& o) {
    require_args(d, 2);
    const Object& a = algebroid_object(d.refs[0], d.ref_locs[0]);
    const std::string& ks = d.refs[1];
    if (ks.empty() || !std::all_of(ks.begin(), ks.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }) ||
        ks.size() > 2 || std::stoi(ks) < 1) {
      throw InputError(d.ref_locs[1], "tkm order must be a positive integer");
    }
    const int k = std::stoi(ks);
    TkmBlocks blocks;
    for (const auto& s : d.body) {
      if (s.head != "Gamma" || s.indices.size() != 3 || s.indices[0].size() != 1 || s.indices[1].size() != 1) {
        throw InputError(s.loc, "expected Gamma[a_l][i][b_m, ...], found " + index_text(s));
      }
      auto upper = split_lifted(s.indices[0][0]);
      if (!upper) throw InputError(s.loc, "'" + s.indices[0][0] + "' is not a lifted coordinate a_l");
      require_coord(s, a.chart, upper->first, CoordKind::base, "a base coordinate");
      require_coord(s, a.chart, s.indices[1][0], CoordKind::algebroid_odd, "an odd coordinate");
      TkmKey key;
      key.order = upper->second;
      key.upper = upper->first;
      key.odd = s.indices[1][0];
      for (const auto& l : s.indices[2]) {
        auto low = split_lifted(l);
        if (!low) throw InputError(s.loc, "'" + l + "' is not a lifted coordinate b_m");
        require_coord(s, a.chart, low->first, CoordKind::base, "a base coordinate");
        key.lower.push_back(*low);
      }
      if (!blocks.emplace(key, eval_base(s, a.chart)).second) throw InputError(s.loc, index_text(s) + " given twice");
    }
    if (!usable(o, a)) return;
    guarded(d, o, [&] {
      const Algebroid A = algebroid_of(a)->verify();
      o.connection = tkm_connection(A, k, blocks);
      o.report = validate_connection_field(A, o.connection->bundle(), o.connection->field());
      o.report.merge(truncation_report(*o.connection), "truncation: ");
      o.report.title = "tkm construction " + d.name;
      o.has_report = true;
    });
  }

  void declare_dvb(const Decl& d, Object& o) {
    require_args(d, 2);
    const Object& a = algebroid_object(d.refs[0], d.ref_locs[0]);
    const Object& c = chart_object(d.refs[1], d.ref_locs[1]);
    DVBBlocks b;
    for (const auto& s : d.body) {
      const bool cross = s.head == "cross";
      if (s.head != "e1" && s.head != "e2" && s.head != "core" && !cross) {
        throw InputError(s.loc, "expected e1, e2, core or cross blocks, found " + index_text(s));
      }
      require_indices(s, s.head, cross ? 4 : 3);
      const std::string& odd = cross ? s.indices[2][0] : s.indices[1][0];
      require_coord(s, a.chart, odd, CoordKind::algebroid_odd, "an odd coordinate");
      Expression v = eval_base(s, a.chart);
      bool fresh = true;
      if (cross) {
        fresh = b.cross.emplace(std::tuple{s.indices[0][0], s.indices[1][0], odd, s.indices[3][0]}, v).second;
      } else {
        auto& part = s.head == "e1" ? b.e1 : s.head == "e2" ? b.e2 : b.core;
        fresh = part.emplace(std::tuple{s.indices[0][0], odd, s.indices[2][0]}, v).second;
      }
      if (!fresh) throw InputError(s.loc, index_text(s) + " given twice");
    }
    if (!usable(o, a)) return;
    guarded(d, o, [&] {
      const Algebroid A = algebroid_of(a)->verify();
      o.dvb = b;
      o.connection = assemble_biweighted(A, c.chart, b);
      o.report = check_dvb_shape(c.chart);
      o.report.merge(validate_connection_field(A, c.chart, o.connection->field()), "connection: ");
      DVBProjections pr = project_sides_core(*o.connection);
      o.report.merge(pr.report, "projections: ");
      Connection back = assemble_biweighted(A, c.chart, extract_blocks(*o.connection));
      o.report.add("blocks read back reassemble the connection", back.field() == o.connection->field());
      o.report.title = "dvb construction " + d.name;
      o.has_report = true;
    });
  }

  // ---- commands ---------------------------------------------------------------

  CommandResult validate(const Object& o) const;
  CommandResult curvature_of(const Object& o) const;

  Manifest m_;
  std::map<std::string, Object> objects_;
  std::map<std::string, std::size_t> functions_;
};

namespace {

CommandResult failed(CommandResult r, const std::string& why) {
  r.error = why;
  return r;
}

Expression test_function(const ChartPtr& chart) {
  std::vector<Expression> args;
  for (auto r : chart->indices_of(CoordKind::base)) args.push_back(Expression::coordinate(chart, r));
  return Expression::function(chart, "f", args);
}

}  // namespace

CommandResult Model::validate(const Object& o) const {
  const Decl& d = *o.decl;
  CommandResult r;
  r.verb = "validate";
  r.args = {d.name};
  if (!o.failure.empty()) return failed(r, o.failure);
  try {
    switch (d.kind) {
      case Decl::Kind::chart:
        r.report = check_homogeneity_structure(o.chart);
        if (o.chart->gradings() == 2) r.report.merge(check_dvb_shape(o.chart), "double vector bundle: ");
        break;
      case Decl::Kind::transition:
        if (!o.transition->has_inverse()) return failed(r, "transition '" + d.name + "' has no inverse block");
        r.report = validate_transition(*o.transition);
        if (o.transition->source->gradings() == 2) r.report.merge(validate_dvb_chart(*o.transition), "double vector bundle: ");
        break;
      case Decl::Kind::algebroid:
        r.report = check_structure(*o.algebroid);
        if (r.report.passed()) r.report.merge(check_anchor_morphism(o.algebroid->verify()), "anchor morphism: ");
        break;
      case Decl::Kind::poisson:
        r.report = o.cotangent->report;
        break;
      case Decl::Kind::connection:
      case Decl::Kind::splitting: {
        const Connection& C = *o.connection;
        r.report = validate_connection_field(C.algebroid(), C.bundle(), C.field());
        r.report.merge(check_h_morphism(C), "h morphism: ");
        if (d.kind == Decl::Kind::splitting) r.report.merge(validate_transition(*o.transition), "splitting: ");
        break;
      }
      case Decl::Kind::gauge: {
        const Object& c = objects_.at(o.owner);
        if (!o.transition->has_inverse()) return failed(r, "gauge '" + d.name + "' has no inverse block");
        r.report = validate_gauge(c.connection->product(), *o.transition);
        break;
      }
      case Decl::Kind::section:
        r.report.add("components are base functions", true);
        break;
      case Decl::Kind::construction:
        r.report = o.report;
        break;
      case Decl::Kind::function: break;
    }
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    return failed(r, e.what());
  }
  r.report.title = std::string("validate ") + to_string(d.kind) + " " + d.name;
  return r;
}

CommandResult Model::curvature_of(const Object& o) const {
  CommandResult r;
  r.verb = "curvature";
  r.args = {o.decl->name};
  if (!o.failure.empty()) return failed(r, o.failure);
  const Connection& C = *o.connection;
  VectorField R = curvature(C);
  r.values.emplace_back("nabla^2", R.str());
  VectorField closed = christoffel_curvature(C);
  r.report.add("closed form from Q and Gamma equals 1/2 [nabla, nabla]", closed == R,
               closed == R ? std::string() : "residual " + (closed - R).str());
  r.report.note("flat", R.is_zero());
  if (o.t2m) r.report.merge(t2m_curvature_check(*o.g), "Riemann form: ");
  r.report.title = "curvature of " + o.decl->name;
  return r;
}

CommandResult Model::execute(const Command& c) const {
  CommandResult r;
  r.verb = c.verb;
  r.args = c.args;
  auto conn = [&](std::size_t i) -> const Object& { return connection_object(c.args[i], c.arg_locs[i]); };
  auto pending = [&](const Object& o) { return !o.failure.empty(); };

  if (c.verb == "validate") {
    const Object& o = lookup(c.args[0], c.arg_locs[0],
                             {Decl::Kind::chart, Decl::Kind::transition, Decl::Kind::algebroid, Decl::Kind::poisson,
                              Decl::Kind::connection, Decl::Kind::splitting, Decl::Kind::gauge, Decl::Kind::section,
                              Decl::Kind::construction},
                             "a declared object");
    return validate(o);
  }
  if (c.verb == "report") {
    const Object& o = lookup(c.args[0], c.arg_locs[0], {Decl::Kind::construction, Decl::Kind::connection, Decl::Kind::splitting},
                             "a construction or connection");
    if (o.decl->kind != Decl::Kind::construction) {
      if (pending(o)) return failed(r, o.failure);
      r.report = truncation_report(*o.connection);
      r.report.merge(check_h_morphism(*o.connection), "h morphism: ");
      r.report.title = "report on " + o.decl->name;
      return r;
    }
    CommandResult v = validate(o);
    v.verb = "report";
    v.report.title = "report on " + o.decl->name;
    return v;
  }
  if (c.verb == "curvature") return curvature_of(conn(0));

  try {
    if (c.verb == "gauge") {
      const Object& o = conn(0);
      const Object& g = lookup(c.args[1], c.arg_locs[1], {Decl::Kind::gauge}, "a gauge element");
      if (pending(o)) return failed(r, o.failure);
      if (pending(g)) return failed(r, g.failure);
      if (!g.transition->has_inverse()) throw InputError(c.arg_locs[1], "gauge '" + c.args[1] + "' has no inverse block");
      const Connection& C = *o.connection;
      r.report = validate_gauge(C.product(), *g.transition);
      if (!r.report.passed()) return r;
      Connection moved = gauge_transform(C, *g.transition);
      r.values.emplace_back("nabla^g", moved.field().str());
      r.report.merge(validate_connection_field(moved.algebroid(), moved.bundle(), moved.field()), "transformed: ");
      VectorField lhs = curvature(moved);
      VectorField rhs = transport(curvature(C), g.transition->inverse, g.transition->forward);
      r.report.add("curvature transforms by the same gauge element", lhs == rhs);
      r.report.title = "gauge " + c.args[0] + " by " + c.args[1];
      return r;
    }
    if (c.verb == "act" || c.verb == "lift") {
      const Object& o = conn(0);
      if (pending(o)) return failed(r, o.failure);
      const Connection& C = *o.connection;
      std::vector<const Section*> secs;
      for (std::size_t i = 1; i < c.args.size(); ++i) {
        const Object& s = lookup(c.args[i], c.arg_locs[i], {Decl::Kind::section}, "a section");
        if (pending(s)) return failed(r, s.failure);
        if (!compatible(s.section->u.empty() ? C.algebroid().chart() : s.section->u[0].chart(), C.algebroid().chart()) ||
            s.section->u.size() != C.algebroid().rank()) {
          throw InputError(c.arg_locs[i], "section '" + c.args[i] + "' belongs to another algebroid");
        }
        secs.push_back(&*s.section);
      }
      const Algebroid& A = C.algebroid();
      Expression f = test_function(A.chart());
      if (c.verb == "act") {
        Substitution a = quasi_action(C, *secs[0]);
        for (const auto& coord : C.bundle()->coords()) {
          r.values.emplace_back(coord.name + " ->", a.image(coord.name).str());
        }
        if (secs.size() > 1) {
          QuasiActionReport q = check_quasi_action(C, *secs[0], *secs[1], f);
          r.report = q.conditions;
          const bool flat = is_flat(C);
          r.report.add("a_[u,v] = [a_u, a_v] to first order (condition 4) exactly when flat", q.action == flat,
                       q.action ? std::string() : "defect " + q.defect.str());
        } else {
          r.report.add("image of eps-free coordinates is eps-linear", true);
        }
        r.report.title = "quasi-action of " + c.args[1] + " on " + c.args[0];
        return r;
      }
      VectorField H = horizontal_lift(C, *secs[0]);
      r.values.emplace_back("H(" + c.args[1] + ")", H.str());
      Section fu = *secs[0];
      for (auto& x : fu.u) x = f * x;
      VectorField Hf = horizontal_lift(C, fu);
      r.report.add("H(f u) = f H(u)", Hf == f.embed(C.bundle()) * H);
      VectorField rho = anchor_field(A, *secs[0]).embed(C.bundle());
      r.report.add("H(u) projects to rho_u", H.restrict_to(CoordKind::base) == rho);
      if (secs.size() > 1) {
        VectorField R = curvature_tensor(C, *secs[0], *secs[1]);
        r.values.emplace_back("R(" + c.args[1] + "," + c.args[2] + ")", R.str());
        VectorField K = curvature_contraction(C, *secs[0], *secs[1]);
        r.report.add("R(u,v) = -u^i v^j C_ij", R == K);
      }
      r.report.title = "horizontal lift on " + c.args[0];
      return r;
    }
    if (c.verb == "project") {
      const Object& o = conn(0);
      if (pending(o)) return failed(r, o.failure);
      const Connection& C = *o.connection;
      int l = c.args[1].size() > 3 ? 1000 : std::stoi(c.args[1]);
      int deg = C.bundle()->degree();
      if (l < 1 || l > deg) throw InputError(c.arg_locs[1], "truncation order must lie in 1.." + std::to_string(deg));
      Connection T = project_truncation(C, l);
      r.values.emplace_back("nabla_" + c.args[1], T.field().str());
      r.report = validate_connection_field(T.algebroid(), T.bundle(), T.field());
      r.report.merge(truncation_report(C), "tower: ");
      r.report.title = "projection of " + c.args[0] + " to degree " + c.args[1];
      return r;
    }
    if (c.verb == "transform") {
      const Object& o = conn(0);
      const Object& t = lookup(c.args[1], c.arg_locs[1], {Decl::Kind::transition}, "a transition");
      if (pending(o)) return failed(r, o.failure);
      if (pending(t)) return failed(r, t.failure);
      const Connection& C = *o.connection;
      if (!compatible(t.transition->source, C.product())) {
        throw InputError(c.arg_locs[1], "transition '" + c.args[1] + "' does not start on the product chart of " + c.args[0]);
      }
      ChristoffelData law = transform_christoffels(C, *t.transition);
      ChristoffelData conj = conjugated_christoffels(C, *t.transition);
      bool same = law.size() == conj.size();
      for (const auto& [k, e] : law) {
        auto it = conj.find(k);
        same = same && it != conj.end() && it->second == e;
        r.values.emplace_back("Gamma'[" + k.first + "][" + k.second + "]", e.str());
      }
      for (const auto& [k, e] : conj) same = same && law.count(k);
      r.report.add("transformation law equals conjugation", same);
      r.report.title = "transform " + c.args[0] + " by " + c.args[1];
      return r;
    }
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    return failed(r, e.what());
  }
  throw InputError(c.loc, "unknown command '" + c.verb + "'");
}

std::vector<CommandResult> Model::run(std::string_view verb) const {
  std::vector<CommandResult> out;
  bool any = false;
  for (const auto& c : m_.commands) {
    if (verb == "run" || c.verb == verb) {
      out.push_back(execute(c));
      any = true;
    }
  }
  if (any) return out;
  auto each = [&](auto pred, auto fn) {
    for (const auto& d : m_.decls) {
      const Object& o = objects_.at(d.name);
      if (pred(o)) out.push_back(fn(o));
    }
  };
  if (verb == "validate" || verb == "run") {
    each([](const Object& o) { return o.decl->kind != Decl::Kind::function; }, [&](const Object& o) { return validate(o); });
  } else if (verb == "curvature") {
    each([](const Object& o) { return o.connection.has_value() || !o.failure.empty(); },
         [&](const Object& o) { return curvature_of(o); });
  } else if (verb == "report" || verb == "t2m" || verb == "poisson" || verb == "tkm" || verb == "dvb") {
    each([&](const Object& o) {
           return o.decl->kind == Decl::Kind::construction && (verb == "report" || o.decl->form == verb);
         },
         [&](const Object& o) {
           CommandResult v = validate(o);
           v.verb = "report";
           v.report.title = "report on " + o.decl->name;
           return v;
         });
  }
  return out;
}

std::vector<CommandResult> Model::properties(std::uint64_t seed, int trials) const {
  std::vector<CommandResult> out;
  InstanceGenerator G(seed);
  for (const auto& d : m_.decls) {
    const Object& o = objects_.at(d.name);
    if (!o.failure.empty()) continue;
    CommandResult r;
    r.verb = "properties";
    r.args = {d.name};
    try {
      if (const Algebroid* A0 = algebroid_of(o); A0 && (d.kind == Decl::Kind::algebroid || d.kind == Decl::Kind::poisson)) {
        if (!check_structure(*A0).passed()) continue;
        Algebroid A = A0->verify();
        for (int t = 0; t < trials; ++t) {
          Section u = G.section(A, 2), v = G.section(A, 2);
          Expression f = G.base_polynomial(A.chart(), 2);
          Section b = derived_bracket(A, u, v);
          Section closed = closed_form_bracket(A, u, v);
          bool same = b.u.size() == closed.u.size();
          for (std::size_t i = 0; same && i < b.u.size(); ++i) same = b.u[i] == closed.u[i];
          r.report.add("trial " + std::to_string(t) + ": derived bracket equals closed form", same);
          VectorField lhs = anchor_field(A, b);
          VectorField rhs = bracket(anchor_field(A, u), anchor_field(A, v));
          r.report.add("trial " + std::to_string(t) + ": rho_[u,v] = [rho_u, rho_v]", lhs == rhs);
          Expression g = anchor(A, u, f);
          Section fu = u;
          for (auto& x : fu.u) x = f * x;
          r.report.add("trial " + std::to_string(t) + ": rho_(f u) = f rho_u", anchor(A, fu, f) == f * g);
        }
      } else if (o.connection) {
        const Connection& C = *o.connection;
        const Algebroid& A = C.algebroid();
        for (int t = 0; t < trials; ++t) {
          const std::string tag = "trial " + std::to_string(t) + ": ";
          Section u = G.section(A, 1), v = G.section(A, 1);
          Expression f = G.base_polynomial(A.chart(), 1);
          VectorField H = horizontal_lift(C, u);
          Section fu = u;
          for (auto& x : fu.u) x = f * x;
          r.report.add(tag + "H(f u) = f H(u)", horizontal_lift(C, fu) == f.embed(C.bundle()) * H);
          r.report.add(tag + "H(u) projects to rho_u",
                       H.restrict_to(CoordKind::base) == anchor_field(A, u).embed(C.bundle()));
          r.report.add(tag + "R(u,v) = -u^i v^j C_ij", curvature_tensor(C, u, v) == curvature_contraction(C, u, v));
          TransitionMap g = G.gauge(C.product(), 3, 1);
          Connection moved = gauge_transform(C, g);
          r.report.add(tag + "gauge transform is a connection",
                       validate_connection_field(A, C.bundle(), moved.field()).passed());
          r.report.add(tag + "curvature is gauge covariant",
                       curvature(moved) == transport(curvature(C), g.inverse, g.forward));
          TransitionMap T = G.triangular_transition(C.product(), C.product(), 3, 1, true, true, true);
          ChristoffelData law = transform_christoffels(C, T);
          ChristoffelData conj = conjugated_christoffels(C, T);
          bool same = law.size() == conj.size();
          for (const auto& [k, e] : law) same = same && conj.count(k) && conj.at(k) == e;
          r.report.add(tag + "transformation law equals conjugation", same);
        }
      } else {
        continue;
      }
    } catch (const InputError&) {
      throw;
    } catch (const Error& e) {
      r.error = e.what();
    }
    r.report.title = "properties of " + d.name + " (seed " + std::to_string(seed) + ")";
    out.push_back(std::move(r));
  }
  return out;
}

// ---- Session -------------------------------------------------------------------

Session::Session(Manifest m) : model_(std::make_unique<Model>(std::move(m))) {}
Session::~Session() = default;
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

const Manifest& Session::manifest() const { return model_->manifest(); }
CommandResult Session::execute(const Command& c) const { return model_->execute(c); }
std::vector<CommandResult> Session::run(std::string_view verb) const { return model_->run(verb); }
std::vector<CommandResult> Session::properties(std::uint64_t seed, int trials) const {
  return model_->properties(seed, trials);
}

}  // namespace graded::manifest
