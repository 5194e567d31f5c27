#include "graded/expression.hpp"

#include <algorithm>
#include <sstream>

#include "graded/errors.hpp"

namespace graded {

std::string to_string(const Grade& g) { return "(" + to_string(g.parity) + ", " + to_string(g.weight) + ")"; }

namespace {

template <typename T>
int three_way(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

int compare_rational(const Rational& a, const Rational& b) {
  int c = cmp(a, b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

/// Merges two sorted (key, exponent) lists adding exponents.
template <typename Key, typename Cmp>
std::vector<std::pair<Key, int>> merge_powers(const std::vector<std::pair<Key, int>>& a,
                                              const std::vector<std::pair<Key, int>>& b, Cmp cmp) {
  std::vector<std::pair<Key, int>> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    int c = cmp(a[i].first, b[j].first);
    if (c < 0) {
      out.push_back(a[i++]);
    } else if (c > 0) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  for (; j < b.size(); ++j) out.push_back(b[j]);
  return out;
}

/// Product of two canonical monomials. Returns false when the product
/// vanishes; otherwise flips `negative` by the Koszul sign.
bool multiply_monomials(const Monomial& a, const Monomial& b, Monomial& out, bool& negative) {
  if (a.eps && b.eps) return false;
  std::size_t inversions = 0;
  out.odds.clear();
  out.odds.reserve(a.odds.size() + b.odds.size());
  std::size_t i = 0, j = 0;
  while (i < a.odds.size() && j < b.odds.size()) {
    if (a.odds[i] == b.odds[j]) return false;
    if (a.odds[i] < b.odds[j]) {
      out.odds.push_back(a.odds[i++]);
    } else {
      inversions += a.odds.size() - i;
      out.odds.push_back(b.odds[j++]);
    }
  }
  for (; i < a.odds.size(); ++i) out.odds.push_back(a.odds[i]);
  for (; j < b.odds.size(); ++j) out.odds.push_back(b.odds[j]);
  if (inversions % 2) negative = !negative;
  out.eps = a.eps || b.eps;
  out.evens = merge_powers(a.evens, b.evens, [](std::size_t x, std::size_t y) { return three_way(x, y); });
  out.functions =
      merge_powers(a.functions, b.functions, [](const FunctionApp& x, const FunctionApp& y) { return compare(x, y); });
  return true;
}

Expression single(const ChartPtr& chart, Rational c, Monomial m) {
  std::vector<Term> t;
  t.push_back(Term{std::move(c), std::move(m)});
  return Expression::from_terms(chart, std::move(t));
}

std::string function_string(const FunctionApp& f) {
  std::string s = f.name;
  if (std::any_of(f.deriv.begin(), f.deriv.end(), [](int d) { return d != 0; })) {
    s += '{';
    for (std::size_t i = 0; i < f.deriv.size(); ++i) s += (i ? "," : "") + std::to_string(f.deriv[i]);
    s += '}';
  }
  s += '(';
  for (std::size_t i = 0; i < f.args.size(); ++i) s += (i ? ", " : "") + f.args[i].str();
  s += ')';
  return s;
}

}  // namespace

int compare(const FunctionApp& a, const FunctionApp& b) {
  if (int c = a.name.compare(b.name); c != 0) return c < 0 ? -1 : 1;
  if (int c = three_way(a.deriv, b.deriv); c != 0) return c;
  if (int c = three_way(a.args.size(), b.args.size()); c != 0) return c;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (int c = Expression::compare(a.args[i], b.args[i]); c != 0) return c;
  }
  return 0;
}

int compare(const Monomial& a, const Monomial& b) {
  if (int c = three_way(a.eps, b.eps); c != 0) return c;
  if (int c = three_way(a.odds.size(), b.odds.size()); c != 0) return c;
  if (int c = three_way(a.odds, b.odds); c != 0) return c;
  if (int c = three_way(a.evens, b.evens); c != 0) return c;
  if (int c = three_way(a.functions.size(), b.functions.size()); c != 0) return c;
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    if (int c = compare(a.functions[i].first, b.functions[i].first); c != 0) return c;
    if (int c = three_way(a.functions[i].second, b.functions[i].second); c != 0) return c;
  }
  return 0;
}

Grade grade_of_monomial(const Chart& chart, const Monomial& m) {
  Grade g{Parity::even, chart.zero_weight()};
  for (const auto& [rank, e] : m.evens) {
    const auto& w = chart.at(rank).weight;
    for (std::size_t s = 0; s < w.size(); ++s) g.weight[s] += e * w[s];
  }
  for (auto rank : m.odds) {
    const auto& w = chart.at(rank).weight;
    for (std::size_t s = 0; s < w.size(); ++s) g.weight[s] += w[s];
  }
  if (m.odds.size() % 2) g.parity = Parity::odd;
  return g;
}

Expression Expression::constant(ChartPtr chart, const Rational& c) { return single(chart, c, Monomial{}); }

Expression Expression::coordinate(ChartPtr chart, std::size_t rank) {
  if (rank >= chart->size()) throw RangeError("coordinate rank out of range");
  Monomial m;
  if (is_odd(chart->at(rank).parity)) {
    m.odds.push_back(rank);
  } else {
    m.evens.emplace_back(rank, 1);
  }
  return single(chart, 1, std::move(m));
}

Expression Expression::coordinate(ChartPtr chart, std::string_view name) {
  auto rank = chart->index(name);
  return coordinate(std::move(chart), rank);
}

Expression Expression::epsilon(ChartPtr chart) {
  Monomial m;
  m.eps = true;
  return single(chart, 1, std::move(m));
}

Expression Expression::function(ChartPtr chart, std::string name, std::vector<Expression> args,
                                std::vector<int> deriv) {
  if (deriv.empty()) deriv.assign(args.size(), 0);
  if (deriv.size() != args.size()) throw DomainError("derivative multi-index of " + name + " has wrong length");
  for (auto& a : args) {
    require_same_chart(chart, a.chart(), "function argument");
    for (const auto& t : a.terms()) {
      Grade g = grade_of_monomial(*chart, t.mono);
      if (is_odd(g.parity) || g.weight != chart->zero_weight()) {
        throw GradingError("argument of " + name + " must be even of weight zero, got " + a.str());
      }
    }
  }
  // f(a0 + eps a1) = f(a0) + eps * sum_k a1_k * d_k f(a0)
  const bool any_eps = std::any_of(args.begin(), args.end(), [](const Expression& a) { return a.has_epsilon(); });
  if (any_eps) {
    std::vector<Expression> base_args;
    base_args.reserve(args.size());
    for (auto& a : args) base_args.push_back(a.without_epsilon());
    Expression result = function(chart, name, base_args, deriv);
    Expression eps = epsilon(chart);
    for (std::size_t k = 0; k < args.size(); ++k) {
      Expression shift = args[k].epsilon_part();
      if (shift.is_zero()) continue;
      auto dk = deriv;
      ++dk[k];
      result += eps * shift * function(chart, name, base_args, dk);
    }
    return result;
  }
  Monomial m;
  m.functions.emplace_back(FunctionApp{std::move(name), std::move(deriv), std::move(args)}, 1);
  return single(chart, 1, std::move(m));
}

Expression Expression::from_terms(ChartPtr chart, std::vector<Term> terms) {
  Expression e(std::move(chart));
  e.terms_ = std::move(terms);
  e.normalize();
  return e;
}

void Expression::normalize() {
  std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return graded::compare(a.mono, b.mono) < 0; });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (auto& t : terms_) {
    if (!merged.empty() && graded::compare(merged.back().mono, t.mono) == 0) {
      merged.back().coeff += t.coeff;
    } else {
      if (!merged.empty() && sgn(merged.back().coeff) == 0) merged.pop_back();
      merged.push_back(std::move(t));
    }
  }
  if (!merged.empty() && sgn(merged.back().coeff) == 0) merged.pop_back();
  terms_ = std::move(merged);
}

std::optional<Rational> Expression::as_constant() const {
  if (terms_.empty()) return Rational(0);
  if (terms_.size() == 1 && terms_[0].mono.empty()) return terms_[0].coeff;
  return std::nullopt;
}

Expression Expression::operator-() const {
  Expression r = *this;
  for (auto& t : r.terms_) t.coeff = -t.coeff;
  return r;
}

Expression& Expression::operator+=(const Expression& o) {
  if (!chart_) chart_ = o.chart_;
  require_same_chart(chart_, o.chart_, "addition");
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  normalize();
  return *this;
}

Expression& Expression::operator-=(const Expression& o) {
  if (!chart_) chart_ = o.chart_;
  require_same_chart(chart_, o.chart_, "subtraction");
  for (const auto& t : o.terms_) terms_.push_back(Term{-t.coeff, t.mono});
  normalize();
  return *this;
}

Expression operator*(const Expression& a, const Expression& b) {
  require_same_chart(a.chart_, b.chart_, "multiplication");
  std::vector<Term> out;
  out.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& ta : a.terms_) {
    for (const auto& tb : b.terms_) {
      Monomial m;
      bool negative = false;
      if (!multiply_monomials(ta.mono, tb.mono, m, negative)) continue;
      Rational c = ta.coeff * tb.coeff;
      if (negative) c = -c;
      out.push_back(Term{std::move(c), std::move(m)});
    }
  }
  return Expression::from_terms(a.chart_, std::move(out));
}

Expression& Expression::operator*=(const Expression& o) {
  *this = *this * o;
  return *this;
}

Expression& Expression::operator*=(const Rational& c) {
  if (sgn(c) == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.coeff *= c;
  return *this;
}

Expression Expression::pow(int n) const {
  if (n < 0) throw DomainError("negative power");
  Expression r = constant(chart_, 1);
  Expression base = *this;
  while (n) {
    if (n & 1) r *= base;
    n >>= 1;
    if (n) base = base * base;
  }
  return r;
}

int Expression::compare(const Expression& a, const Expression& b) {
  if (int c = three_way(a.terms_.size(), b.terms_.size()); c != 0) return c;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (int c = graded::compare(a.terms_[i].mono, b.terms_[i].mono); c != 0) return c;
    if (int c = compare_rational(a.terms_[i].coeff, b.terms_[i].coeff); c != 0) return c;
  }
  return 0;
}

bool Expression::equals(const Expression& other) const {
  if (terms_.empty() && other.terms_.empty()) return true;
  require_same_chart(chart_, other.chart_, "equality");
  return compare(*this, other) == 0;
}

Expression Expression::derivative(std::size_t rank) const {
  if (rank >= chart_->size()) throw RangeError("coordinate rank out of range");
  Expression result(chart_);
  if (is_odd(chart_->at(rank).parity)) {
    std::vector<Term> out;
    for (const auto& t : terms_) {
      auto it = std::find(t.mono.odds.begin(), t.mono.odds.end(), rank);
      if (it == t.mono.odds.end()) continue;
      auto pos = static_cast<std::size_t>(it - t.mono.odds.begin());
      Term d = t;
      d.mono.odds.erase(d.mono.odds.begin() + static_cast<std::ptrdiff_t>(pos));
      if (pos % 2) d.coeff = -d.coeff;
      out.push_back(std::move(d));
    }
    return from_terms(chart_, std::move(out));
  }
  std::vector<Term> direct;
  for (const auto& t : terms_) {
    for (std::size_t k = 0; k < t.mono.evens.size(); ++k) {
      if (t.mono.evens[k].first != rank) continue;
      Term d = t;
      int e = d.mono.evens[k].second;
      d.coeff *= e;
      if (e == 1) {
        d.mono.evens.erase(d.mono.evens.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        d.mono.evens[k].second = e - 1;
      }
      direct.push_back(std::move(d));
    }
    for (std::size_t k = 0; k < t.mono.functions.size(); ++k) {
      const auto& [app, p] = t.mono.functions[k];
      Expression chain(chart_);
      for (std::size_t slot = 0; slot < app.args.size(); ++slot) {
        Expression da = app.args[slot].derivative(rank);
        if (da.is_zero()) continue;
        auto dd = app.deriv;
        ++dd[slot];
        chain += function(chart_, app.name, app.args, dd) * da;
      }
      if (chain.is_zero()) continue;
      Term rest = t;
      rest.coeff *= p;
      if (p == 1) {
        rest.mono.functions.erase(rest.mono.functions.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        rest.mono.functions[k].second = p - 1;
      }
      // chain is even, so its position in the product carries no sign
      result += chain * single(chart_, rest.coeff, rest.mono);
    }
  }
  result += from_terms(chart_, std::move(direct));
  return result;
}

Expression Expression::derivative(std::string_view name) const { return derivative(chart_->index(name)); }

std::optional<Grade> Expression::grade() const {
  if (terms_.empty()) return std::nullopt;
  Grade g = grade_of_monomial(*chart_, terms_[0].mono);
  for (std::size_t i = 1; i < terms_.size(); ++i) {
    if (!(grade_of_monomial(*chart_, terms_[i].mono) == g)) return std::nullopt;
  }
  return g;
}

Grade Expression::grade_of() const {
  if (terms_.empty()) throw DomainError("grade_of: the zero expression has no grade");
  Grade g = grade_of_monomial(*chart_, terms_[0].mono);
  for (std::size_t i = 1; i < terms_.size(); ++i) {
    Grade h = grade_of_monomial(*chart_, terms_[i].mono);
    if (!(h == g)) {
      std::string a = term_string(chart_, terms_[0], true);
      std::string b = term_string(chart_, terms_[i], true);
      throw InhomogeneousError("inhomogeneous expression: " + a + " has grade " + to_string(g) + " but " + b +
                                   " has grade " + to_string(h),
                               a, b);
    }
  }
  return g;
}

bool Expression::depends_on(std::size_t rank) const {
  for (const auto& t : terms_) {
    if (std::find(t.mono.odds.begin(), t.mono.odds.end(), rank) != t.mono.odds.end()) return true;
    for (const auto& [r, e] : t.mono.evens) {
      if (r == rank) return true;
    }
    for (const auto& [f, p] : t.mono.functions) {
      for (const auto& a : f.args) {
        if (a.depends_on(rank)) return true;
      }
    }
  }
  return false;
}

bool Expression::depends_on_kind(CoordKind kind) const {
  for (auto r : chart_ ? chart_->indices_of(kind) : std::vector<std::size_t>{}) {
    if (depends_on(r)) return true;
  }
  return false;
}

bool Expression::has_epsilon() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.mono.eps; });
}

bool Expression::is_base() const {
  for (const auto& t : terms_) {
    if (t.mono.eps || !t.mono.odds.empty()) return false;
    for (const auto& [r, e] : t.mono.evens) {
      auto k = chart_->at(r).kind;
      if (k != CoordKind::base && k != CoordKind::formal_parameter) return false;
    }
  }
  return true;
}

Expression Expression::without_epsilon() const {
  std::vector<Term> out;
  for (const auto& t : terms_) {
    if (!t.mono.eps) out.push_back(t);
  }
  return from_terms(chart_, std::move(out));
}

Expression Expression::epsilon_part() const {
  std::vector<Term> out;
  for (const auto& t : terms_) {
    if (t.mono.eps) {
      Term u = t;
      u.mono.eps = false;
      out.push_back(std::move(u));
    }
  }
  return from_terms(chart_, std::move(out));
}

Expression Expression::weight_component(const Multiweight& w) const {
  std::vector<Term> out;
  for (const auto& t : terms_) {
    if (grade_of_monomial(*chart_, t.mono).weight == w) out.push_back(t);
  }
  return from_terms(chart_, std::move(out));
}

Expression Expression::embed(const ChartPtr& target) const {
  if (!chart_ || chart_ == target) {
    Expression r = *this;
    r.chart_ = target;
    return r;
  }
  std::vector<std::size_t> map(chart_->size());
  for (std::size_t i = 0; i < chart_->size(); ++i) {
    auto j = target->find(chart_->at(i).name);
    map[i] = j ? *j : static_cast<std::size_t>(-1);
  }
  auto lookup = [&](std::size_t r) {
    if (map[r] == static_cast<std::size_t>(-1)) {
      throw DomainError("cannot embed: chart " + target->name() + " lacks coordinate " + chart_->at(r).name);
    }
    const auto& from = chart_->at(r);
    const auto& to = target->at(map[r]);
    if (from.parity != to.parity) throw GradingError("embedding changes the parity of " + from.name);
    return map[r];
  };
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) {
    Expression acc = constant(target, t.coeff);
    for (const auto& [f, p] : t.mono.functions) {
      std::vector<Expression> args;
      for (const auto& a : f.args) args.push_back(a.embed(target));
      acc *= function(target, f.name, std::move(args), f.deriv).pow(p);
    }
    for (const auto& [r, e] : t.mono.evens) acc *= coordinate(target, lookup(r)).pow(e);
    for (auto r : t.mono.odds) acc *= coordinate(target, lookup(r));
    if (t.mono.eps) acc *= epsilon(target);
    for (auto& u : acc.terms_) out.push_back(std::move(u));
  }
  return from_terms(target, std::move(out));
}

std::string Expression::term_string(const ChartPtr& chart, const Term& t, bool with_sign) {
  std::vector<std::string> factors;
  for (const auto& [f, p] : t.mono.functions) {
    std::string s = function_string(f);
    if (p > 1) s += "^" + std::to_string(p);
    factors.push_back(std::move(s));
  }
  for (const auto& [r, e] : t.mono.evens) {
    std::string s = chart->at(r).name;
    if (e > 1) s += "^" + std::to_string(e);
    factors.push_back(std::move(s));
  }
  for (auto r : t.mono.odds) factors.push_back(chart->at(r).name);
  if (t.mono.eps) factors.emplace_back(kEpsilonName);

  Rational c = t.coeff;
  std::string sign;
  if (sgn(c) < 0) {
    if (with_sign) sign = "-";
    c = -c;
  }
  std::string body;
  if (factors.empty()) {
    body = c.get_str();
  } else {
    if (c != 1) body = c.get_str() + "*";
    for (std::size_t i = 0; i < factors.size(); ++i) body += (i ? "*" : "") + factors[i];
  }
  return sign + body;
}

std::string Expression::str() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    if (i == 0) {
      s += term_string(chart_, t, true);
    } else {
      s += sgn(t.coeff) < 0 ? " - " : " + ";
      s += term_string(chart_, t, false);
    }
  }
  return s;
}

}  // namespace graded
