#include "graded/vector_field.hpp"

#include "graded/errors.hpp"

namespace graded {

VectorField VectorField::from_components(ChartPtr chart, const std::map<std::string, Expression>& comps) {
  VectorField X(chart);
  for (const auto& [name, e] : comps) X.set(chart->index(name), e);
  return X;
}

VectorField VectorField::partial(ChartPtr chart, std::size_t rank) {
  VectorField X(chart);
  X.set(rank, Expression::constant(chart, 1));
  return X;
}

Expression VectorField::component(std::size_t rank) const {
  auto it = comps_.find(rank);
  if (it == comps_.end()) return Expression(chart_);
  return it->second;
}

void VectorField::set(std::size_t rank, Expression e) {
  if (rank >= chart_->size()) throw RangeError("vector field component out of range");
  if (e.is_zero()) {
    comps_.erase(rank);
    return;
  }
  require_same_chart(chart_, e.chart(), "vector field component");
  comps_[rank] = std::move(e);
}

Expression VectorField::apply(const Expression& f) const {
  require_same_chart(chart_, f.chart(), "vector field action");
  Expression r(chart_);
  for (const auto& [rank, c] : comps_) {
    Expression d = f.derivative(rank);
    if (!d.is_zero()) r += c * d;
  }
  return r;
}

std::optional<Parity> VectorField::parity() const {
  std::optional<Parity> p;
  for (const auto& [rank, c] : comps_) {
    for (const auto& t : c.terms()) {
      Parity q = grade_of_monomial(*chart_, t.mono).parity + chart_->at(rank).parity;
      if (p && *p != q) return std::nullopt;
      p = q;
    }
  }
  return p;
}

std::optional<Multiweight> VectorField::weight() const {
  std::optional<Multiweight> w;
  for (const auto& [rank, c] : comps_) {
    const auto& zw = chart_->at(rank).weight;
    for (const auto& t : c.terms()) {
      Multiweight m = grade_of_monomial(*chart_, t.mono).weight;
      for (std::size_t s = 0; s < m.size(); ++s) m[s] -= zw[s];
      if (w && *w != m) return std::nullopt;
      w = m;
    }
  }
  return w;
}

VectorField VectorField::parity_part(Parity p) const {
  VectorField r(chart_);
  for (const auto& [rank, c] : comps_) {
    std::vector<Term> keep;
    for (const auto& t : c.terms()) {
      if (grade_of_monomial(*chart_, t.mono).parity + chart_->at(rank).parity == p) keep.push_back(t);
    }
    r.set(rank, Expression::from_terms(chart_, std::move(keep)));
  }
  return r;
}

VectorField VectorField::operator-() const {
  VectorField r(chart_);
  for (const auto& [rank, c] : comps_) r.comps_[rank] = -c;
  return r;
}

VectorField& VectorField::operator+=(const VectorField& o) {
  if (!chart_) chart_ = o.chart_;
  require_same_chart(chart_, o.chart_, "vector field addition");
  for (const auto& [rank, c] : o.comps_) set(rank, component(rank) + c);
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  if (!chart_) chart_ = o.chart_;
  require_same_chart(chart_, o.chart_, "vector field subtraction");
  for (const auto& [rank, c] : o.comps_) set(rank, component(rank) - c);
  return *this;
}

VectorField operator*(const Rational& c, const VectorField& X) {
  VectorField r(X.chart_);
  for (const auto& [rank, e] : X.comps_) r.set(rank, c * e);
  return r;
}

VectorField operator*(const Expression& f, const VectorField& X) {
  VectorField r(X.chart_);
  for (const auto& [rank, e] : X.comps_) r.set(rank, f * e);
  return r;
}

bool VectorField::equals(const VectorField& o) const {
  if (is_zero() && o.is_zero()) return true;
  require_same_chart(chart_, o.chart_, "vector field equality");
  if (comps_.size() != o.comps_.size()) return false;
  for (const auto& [rank, c] : comps_) {
    auto it = o.comps_.find(rank);
    if (it == o.comps_.end() || !(it->second == c)) return false;
  }
  return true;
}

VectorField VectorField::restrict_to(CoordKind kind) const {
  VectorField r(chart_);
  for (const auto& [rank, c] : comps_) {
    if (chart_->at(rank).kind == kind) r.comps_[rank] = c;
  }
  return r;
}

VectorField VectorField::embed(const ChartPtr& target) const {
  VectorField r(target);
  for (const auto& [rank, c] : comps_) r.set(target->index(chart_->at(rank).name), c.embed(target));
  return r;
}

std::string VectorField::str() const {
  if (comps_.empty()) return "0";
  std::string s;
  for (const auto& [rank, c] : comps_) {
    if (!s.empty()) s += " + ";
    s += "(" + c.str() + ")*d/d" + chart_->at(rank).name;
  }
  return s;
}

namespace {

VectorField homogeneous_bracket(const VectorField& X, Parity px, const VectorField& Y, Parity py) {
  const bool both_odd = is_odd(px) && is_odd(py);
  VectorField r(X.chart());
  for (std::size_t z = 0; z < X.chart()->size(); ++z) {
    Expression c = X.apply(Y.component(z));
    Expression d = Y.apply(X.component(z));
    r.set(z, both_odd ? c + d : c - d);
  }
  return r;
}

}  // namespace

VectorField bracket(const VectorField& X, const VectorField& Y) {
  require_same_chart(X.chart(), Y.chart(), "bracket");
  VectorField r(X.chart());
  for (Parity px : {Parity::even, Parity::odd}) {
    VectorField Xp = X.parity_part(px);
    if (Xp.is_zero()) continue;
    for (Parity py : {Parity::even, Parity::odd}) {
      VectorField Yp = Y.parity_part(py);
      if (Yp.is_zero()) continue;
      r += homogeneous_bracket(Xp, px, Yp, py);
    }
  }
  return r;
}

}  // namespace graded
