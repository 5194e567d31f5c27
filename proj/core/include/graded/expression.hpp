#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graded/chart.hpp"

namespace graded {

using Rational = mpq_class;

class Expression;

/// An opaque base function applied to base expressions, with formal commuting
/// partial derivatives recorded per argument slot.
struct FunctionApp {
  std::string name;
  std::vector<int> deriv;         // derivative order per argument slot
  std::vector<Expression> args;   // even, weight-zero, epsilon-free
};

/// c * prod f^p * prod z^e * (sorted odd product) * eps^{0,1}
struct Monomial {
  std::vector<std::pair<FunctionApp, int>> functions;  // sorted, powers >= 1
  std::vector<std::pair<std::size_t, int>> evens;      // sorted coordinate ranks, exponents >= 1
  std::vector<std::size_t> odds;                       // strictly ascending coordinate ranks
  bool eps = false;

  bool empty() const { return functions.empty() && evens.empty() && odds.empty() && !eps; }
};

struct Term {
  Rational coeff;
  Monomial mono;
};

struct Grade {
  Parity parity = Parity::even;
  Multiweight weight;
  bool operator==(const Grade&) const = default;
};

std::string to_string(const Grade& g);

int compare(const FunctionApp& a, const FunctionApp& b);
int compare(const Monomial& a, const Monomial& b);

/// Canonical-form element of the graded-super polynomial algebra over a chart.
///
/// Invariants: terms sorted by monomial, no zero coefficients, odd factors in
/// ascending coordinate order with the Koszul sign folded into the
/// coefficient, no repeated odd factor and no eps^2.
class Expression {
 public:
  Expression() = default;
  explicit Expression(ChartPtr chart) : chart_(std::move(chart)) {}

  static Expression constant(ChartPtr chart, const Rational& c);
  static Expression coordinate(ChartPtr chart, std::size_t rank);
  static Expression coordinate(ChartPtr chart, std::string_view name);
  static Expression epsilon(ChartPtr chart);
  /// f(args), Taylor-expanded to first order when an argument carries eps.
  static Expression function(ChartPtr chart, std::string name, std::vector<Expression> args,
                             std::vector<int> deriv = {});
  static Expression from_terms(ChartPtr chart, std::vector<Term> terms);

  const ChartPtr& chart() const { return chart_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  /// Pure rational constant (possibly zero).
  std::optional<Rational> as_constant() const;

  Expression operator-() const;
  Expression& operator+=(const Expression& o);
  Expression& operator-=(const Expression& o);
  Expression& operator*=(const Expression& o);
  Expression& operator*=(const Rational& c);

  friend Expression operator+(Expression a, const Expression& b) { return a += b; }
  friend Expression operator-(Expression a, const Expression& b) { return a -= b; }
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator*(Expression a, const Rational& c) { return a *= c; }
  friend Expression operator*(const Rational& c, Expression a) { return a *= c; }

  Expression pow(int n) const;

  /// Canonical-form identity; throws ChartMismatch on incompatible charts.
  bool equals(const Expression& other) const;
  friend bool operator==(const Expression& a, const Expression& b) { return a.equals(b); }

  /// Total order on canonical forms (same chart assumed).
  static int compare(const Expression& a, const Expression& b);

  /// Left partial derivative. For an odd coordinate the factor is moved to
  /// the front, collecting one sign per odd factor it passes.
  Expression derivative(std::size_t rank) const;
  Expression derivative(std::string_view name) const;

  std::optional<Grade> grade() const;
  /// Throws DomainError on zero, InhomogeneousError naming two disagreeing terms.
  Grade grade_of() const;
  bool is_homogeneous() const { return is_zero() || grade().has_value(); }

  bool depends_on(std::size_t rank) const;
  bool depends_on_kind(CoordKind kind) const;
  bool has_epsilon() const;
  /// Only base coordinates, formal parameters, functions and constants.
  bool is_base() const;
  /// Coefficient of eps^0 and eps^1.
  Expression without_epsilon() const;
  Expression epsilon_part() const;
  /// Terms whose multiweight equals w.
  Expression weight_component(const Multiweight& w) const;

  /// Re-expresses the expression over another chart by coordinate name.
  Expression embed(const ChartPtr& target) const;

  /// Deterministic, whitespace-normalised rendering.
  std::string str() const;

  static std::string term_string(const ChartPtr& chart, const Term& t, bool with_sign);

 private:
  void normalize();

  ChartPtr chart_;
  std::vector<Term> terms_;
};

Grade grade_of_monomial(const Chart& chart, const Monomial& m);

}  // namespace graded
