#include "graded/bundles.hpp"

#include "graded/errors.hpp"

namespace graded {

TransitionMap TransitionMap::make(std::string name, ChartPtr source, ChartPtr target,
                                  const std::map<std::string, Expression>& forward,
                                  const std::map<std::string, Expression>& inverse) {
  TransitionMap T;
  T.name = std::move(name);
  T.source = source;
  T.target = target;
  T.forward = Substitution::make(target, source, forward, false);
  T.inverse = Substitution::make(source, target, inverse, false);
  return T;
}

TransitionMap TransitionMap::identity(ChartPtr chart) { return make("identity", chart, chart, {}, {}); }

TransitionMap TransitionMap::forward_only(std::string name, ChartPtr source, ChartPtr target,
                                          const std::map<std::string, Expression>& forward) {
  TransitionMap T;
  T.name = std::move(name);
  T.source = source;
  T.target = target;
  T.forward = Substitution::make(target, source, forward, false);
  return T;
}

TransitionMap TransitionMap::inverted() const {
  if (!has_inverse()) throw IncompleteMap("transition " + name + " has no inverse");
  TransitionMap T;
  T.name = name + "^-1";
  T.source = target;
  T.target = source;
  T.forward = inverse;
  T.inverse = forward;
  return T;
}

TransitionMap compose(const TransitionMap& a, const TransitionMap& b) {
  require_same_chart(a.target, b.source, "transition composition");
  if (!a.has_inverse() || !b.has_inverse()) throw IncompleteMap("composition needs both inverses");
  TransitionMap T;
  T.name = a.name + ";" + b.name;
  T.source = a.source;
  T.target = b.target;
  T.forward = compose(b.forward, a.forward);
  T.inverse = compose(a.inverse, b.inverse);
  return T;
}

namespace {

void add_grading_checks(Report& r, const Substitution& s, const std::string& label) {
  auto bad = s.grading_violations();
  r.add(label + " preserves parity and weight", bad.empty(), bad.empty() ? std::string() : bad.front());
}

void add_form_checks(Report& r, const Substitution& s, const std::string& label) {
  std::string problem;
  for (std::size_t i = 0; i < s.from()->size() && problem.empty(); ++i) {
    const auto& c = s.from()->at(i);
    const auto& e = s.image(i);
    if (e.has_epsilon()) problem = "image of " + c.name + " involves eps";
    if (c.kind == CoordKind::base && !e.is_base()) problem = "base coordinate " + c.name + " maps to a non-base function";
  }
  r.add(label + " has polynomial fiber form", problem.empty(), problem);
}

void add_inverse_checks(Report& r, const Substitution& first, const Substitution& second, const std::string& label) {
  // second(first(z)) must reproduce z on first.from()
  for (std::size_t i = 0; i < first.from()->size(); ++i) {
    Expression back = second.apply(first.image(i));
    Expression z = Expression::coordinate(second.to(), first.from()->at(i).name);
    Expression residual = back - z;
    r.add(label + " on " + first.from()->at(i).name, residual.is_zero(),
          residual.is_zero() ? std::string() : "residual " + residual.str());
  }
}

}  // namespace

Report validate_transition(const TransitionMap& T) {
  if (!T.has_inverse()) throw IncompleteMap("transition " + T.name + " has no supplied inverse");
  Report r;
  r.title = "transition " + T.name + ": " + T.source->name() + " -> " + T.target->name();
  if (T.source->gradings() != T.target->gradings()) r.add("charts share gradings", false);
  add_grading_checks(r, T.forward, "forward");
  add_grading_checks(r, T.inverse, "inverse");
  add_form_checks(r, T.forward, "forward");
  add_form_checks(r, T.inverse, "inverse");
  add_inverse_checks(r, T.forward, T.inverse, "inverse o forward");
  add_inverse_checks(r, T.inverse, T.forward, "forward o inverse");
  return r;
}

ChartPtr with_parameters(const ChartPtr& chart, const std::vector<std::string>& names) {
  std::vector<CoordinateDescriptor> coords(chart->coords().begin(), chart->coords().end());
  for (const auto& n : names) {
    if (chart->contains(n)) throw DomainError("parameter name '" + n + "' clashes with a coordinate");
    coords.push_back({n, Parity::even, chart->zero_weight(), CoordKind::formal_parameter});
  }
  return Chart::make(chart->name(), chart->gradings(), std::move(coords));
}

Substitution homogeneity_action(const ChartPtr& chart, std::size_t slot, const std::string& t) {
  if (slot >= chart->gradings()) throw RangeError("grading slot out of range");
  Expression tt = Expression::coordinate(chart, t);
  std::map<std::string, Expression> m;
  for (std::size_t i = 0; i < chart->size(); ++i) {
    int w = chart->at(i).weight[slot];
    if (w != 0) m.emplace(chart->at(i).name, tt.pow(w) * Expression::coordinate(chart, i));
  }
  return Substitution::make(chart, chart, m);
}

Expression homogeneity_scale(const Expression& e, std::size_t slot, const std::string& t) {
  ChartPtr ext = with_parameters(e.chart(), {t});
  return homogeneity_action(ext, slot, t).apply(e.embed(ext));
}

Report check_homogeneity_structure(const ChartPtr& chart) {
  Report r;
  r.title = "homogeneity structure of " + chart->name();
  ChartPtr ext = with_parameters(chart, {"t", "s", "ts"});
  for (std::size_t slot = 0; slot < chart->gradings(); ++slot) {
    auto ht = homogeneity_action(ext, slot, "t");
    auto hs = homogeneity_action(ext, slot, "s");
    // h_ts with the product written out: z -> (ts)^w z
    Expression ts = Expression::coordinate(ext, "t") * Expression::coordinate(ext, "s");
    for (std::size_t i = 0; i < chart->size(); ++i) {
      Expression z = Expression::coordinate(ext, chart->at(i).name);
      Expression lhs = ht.apply(hs.apply(z));
      Expression rhs = ts.pow(chart->at(i).weight[slot]) * z;
      r.add("slot " + std::to_string(slot) + ": h_t h_s = h_ts on " + chart->at(i).name, lhs == rhs,
            lhs == rhs ? std::string() : "residual " + (lhs - rhs).str());
    }
    for (std::size_t other = slot + 1; other < chart->gradings(); ++other) {
      auto hs2 = homogeneity_action(ext, other, "s");
      for (std::size_t i = 0; i < chart->size(); ++i) {
        Expression z = Expression::coordinate(ext, chart->at(i).name);
        Expression a = ht.apply(hs2.apply(z));
        Expression b = hs2.apply(ht.apply(z));
        r.add("slots " + std::to_string(slot) + "," + std::to_string(other) + " commute on " + chart->at(i).name,
              a == b, a == b ? std::string() : "residual " + (a - b).str());
      }
    }
  }
  return r;
}

Report regularity_test(const ChartPtr& chart, std::size_t slot) {
  Report r;
  r.title = "regularity of the homogeneity structure of " + chart->name();
  ChartPtr ext = with_parameters(chart, {"t"});
  auto ht = homogeneity_action(ext, slot, "t");
  auto at_zero = Substitution::make(ext, ext, {{"t", Expression(ext)}});
  for (std::size_t i = 0; i < chart->size(); ++i) {
    const auto& c = chart->at(i);
    if (c.weight[slot] == 0) continue;
    Expression z = Expression::coordinate(ext, c.name);
    Expression velocity = at_zero.apply(ht.apply(z).derivative("t"));
    r.add("d/dt h_t(" + c.name + ") at t=0 detects the fiber", !velocity.is_zero(),
          "= " + velocity.str() + " (weight " + std::to_string(c.weight[slot]) + ")");
  }
  return r;
}

ChartPtr truncate(const ChartPtr& chart, int l, std::size_t slot) {
  if (l < 0 || l > chart->degree(slot)) {
    throw RangeError("truncation degree " + std::to_string(l) + " outside 0.." + std::to_string(chart->degree(slot)));
  }
  std::vector<CoordinateDescriptor> keep;
  for (const auto& c : chart->coords()) {
    if (c.kind != CoordKind::fiber || c.weight[slot] <= l) keep.push_back(c);
  }
  return Chart::make(chart->name() + "_" + std::to_string(l), chart->gradings(), std::move(keep));
}

namespace {

Substitution truncate_substitution(const Substitution& s, const ChartPtr& from, const ChartPtr& to) {
  std::map<std::string, Expression> m;
  for (const auto& c : from->coords()) m.emplace(c.name, s.image(c.name).embed(to));
  return Substitution::make(from, to, m, false);
}

}  // namespace

TransitionMap truncate(const TransitionMap& T, int l, std::size_t slot) {
  if (!T.has_inverse()) throw IncompleteMap("transition " + T.name + " has no supplied inverse");
  TransitionMap R;
  R.name = T.name + "_" + std::to_string(l);
  R.source = truncate(T.source, l, slot);
  R.target = truncate(T.target, l, slot);
  R.forward = truncate_substitution(T.forward, R.target, R.source);
  R.inverse = truncate_substitution(T.inverse, R.source, R.target);
  return R;
}

std::string lifted_name(const std::string& base, int order) {
  return order == 0 ? base : base + "_" + std::to_string(order);
}

ChartPtr higher_tangent_chart(const ChartPtr& base, int k, const std::string& name) {
  if (k < 1) throw RangeError("tangent order must be at least 1");
  if (base->gradings() != 1) throw DomainError("higher tangent bundles are built over singly graded base charts");
  std::vector<CoordinateDescriptor> coords;
  for (const auto& c : base->coords()) {
    if (c.kind != CoordKind::base) throw DomainError("base chart for T^k M has non-base coordinate " + c.name);
    coords.push_back(c);
    for (int i = 1; i <= k; ++i) coords.push_back({lifted_name(c.name, i), Parity::even, {i}, CoordKind::fiber});
  }
  return Chart::make(name.empty() ? "T" + std::to_string(k) + base->name() : name, 1, std::move(coords));
}

int tangent_order(const ChartPtr& tk) { return tk->degree(0); }

Expression alpha_lift(const Expression& f, int alpha, const ChartPtr& tk) {
  const int k = tangent_order(tk);
  if (alpha < 0 || alpha > k) throw RangeError("lift order " + std::to_string(alpha) + " outside 0.." + std::to_string(k));
  VectorField D(tk);
  for (auto a : tk->indices_of(CoordKind::base)) {
    const auto& name = tk->at(a).name;
    for (int i = 0; i < k; ++i) {
      D.set(lifted_name(name, i), Expression::coordinate(tk, lifted_name(name, i + 1)));
    }
  }
  Expression r = f.embed(tk);
  for (int i = 0; i < alpha; ++i) r = D.apply(r);
  return r;
}

TransitionMap higher_tangent_transition(const TransitionMap& base, int k) {
  if (!base.has_inverse()) throw IncompleteMap("base change " + base.name + " has no supplied inverse");
  ChartPtr src = higher_tangent_chart(base.source, k);
  ChartPtr tgt = higher_tangent_chart(base.target, k);
  std::map<std::string, Expression> fwd, inv;
  for (auto a : base.target->indices_of(CoordKind::base)) {
    const auto& name = base.target->at(a).name;
    for (int i = 0; i <= k; ++i) fwd.emplace(lifted_name(name, i), alpha_lift(base.forward.image(a), i, src));
  }
  for (auto a : base.source->indices_of(CoordKind::base)) {
    const auto& name = base.source->at(a).name;
    for (int i = 0; i <= k; ++i) inv.emplace(lifted_name(name, i), alpha_lift(base.inverse.image(a), i, tgt));
  }
  return TransitionMap::make(base.name + "^(" + std::to_string(k) + ")", src, tgt, fwd, inv);
}

}  // namespace graded
