#include "graded/substitution.hpp"

#include "graded/errors.hpp"

namespace graded {

bool same_padded_weight(const Multiweight& a, const Multiweight& b) {
  std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int x = i < a.size() ? a[i] : 0;
    int y = i < b.size() ? b[i] : 0;
    if (x != y) return false;
  }
  return true;
}

Substitution Substitution::make(ChartPtr from, ChartPtr to, const std::map<std::string, Expression>& images,
                                bool check) {
  Substitution s;
  s.from_ = from;
  s.to_ = to;
  for (const auto& [name, e] : images) {
    if (!from->contains(name)) throw DomainError("substitution assigns unknown coordinate '" + name + "'");
    if (!e.is_zero()) require_same_chart(to, e.chart(), "substitution image of " + name);
  }
  s.images_.reserve(from->size());
  for (const auto& c : from->coords()) {
    auto it = images.find(c.name);
    if (it != images.end()) {
      Expression e = it->second;
      if (e.is_zero()) e = Expression(to);
      s.images_.push_back(std::move(e));
    } else if (auto j = to->find(c.name)) {
      s.images_.push_back(Expression::coordinate(to, *j));
    } else {
      throw IncompleteMap("no image for coordinate '" + c.name + "' of chart " + from->name());
    }
  }
  if (check) {
    auto bad = s.grading_violations();
    if (!bad.empty()) throw GradingError(bad.front());
  }
  return s;
}

Substitution Substitution::identity(ChartPtr chart) { return make(chart, chart, {}, false); }

std::vector<std::string> Substitution::grading_violations() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const auto& c = from_->at(i);
    const auto& e = images_[i];
    if (e.is_zero()) continue;
    for (const auto& t : e.terms()) {
      Grade g = grade_of_monomial(*to_, t.mono);
      if (g.parity != c.parity || !same_padded_weight(g.weight, c.weight)) {
        out.push_back("image of " + c.name + " (grade " + to_string(Grade{c.parity, c.weight}) + ") has term " +
                      Expression::term_string(to_, t, true) + " of grade " + to_string(g));
        break;
      }
    }
  }
  return out;
}

std::map<std::string, Expression> Substitution::as_map() const {
  std::map<std::string, Expression> m;
  for (std::size_t i = 0; i < images_.size(); ++i) m.emplace(from_->at(i).name, images_[i]);
  return m;
}

Expression Substitution::apply(const Expression& e) const {
  if (e.is_zero()) return Expression(to_);
  require_same_chart(from_, e.chart(), "substitution argument");
  Expression result(to_);
  for (const auto& t : e.terms()) {
    Expression acc = Expression::constant(to_, t.coeff);
    for (const auto& [f, p] : t.mono.functions) {
      std::vector<Expression> args;
      args.reserve(f.args.size());
      for (const auto& a : f.args) args.push_back(apply(a));
      acc *= Expression::function(to_, f.name, std::move(args), f.deriv).pow(p);
    }
    for (const auto& [r, k] : t.mono.evens) acc *= images_[r].pow(k);
    for (auto r : t.mono.odds) acc *= images_[r];
    if (t.mono.eps) acc *= Expression::epsilon(to_);
    result += acc;
  }
  return result;
}

Substitution compose(const Substitution& sigma, const Substitution& tau) {
  require_same_chart(sigma.to(), tau.from(), "composition");
  std::map<std::string, Expression> m;
  for (std::size_t i = 0; i < sigma.from()->size(); ++i) {
    m.emplace(sigma.from()->at(i).name, tau.apply(sigma.image(i)));
  }
  return Substitution::make(sigma.from(), tau.to(), m, false);
}

VectorField transport(const VectorField& X, const Substitution& fwd, const Substitution& bwd) {
  require_same_chart(X.chart(), fwd.to(), "transport");
  require_same_chart(bwd.from(), fwd.to(), "transport");
  VectorField r(fwd.from());
  for (std::size_t z = 0; z < fwd.from()->size(); ++z) {
    r.set(z, bwd.apply(X.apply(fwd.image(z))));
  }
  return r;
}

}  // namespace graded
