#pragma once

#include <map>
#include <optional>
#include <string>

#include "graded/expression.hpp"

namespace graded {

/// Derivation X = sum_z X^z d/dz of the function algebra of a chart, acting
/// from the left: X(f) = sum_z X^z * (d/dz f).
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(ChartPtr chart) : chart_(std::move(chart)) {}

  static VectorField from_components(ChartPtr chart, const std::map<std::string, Expression>& comps);
  /// The coordinate vector field d/dz.
  static VectorField partial(ChartPtr chart, std::size_t rank);

  const ChartPtr& chart() const { return chart_; }
  const std::map<std::size_t, Expression>& components() const { return comps_; }
  Expression component(std::size_t rank) const;
  Expression component(std::string_view name) const { return component(chart_->index(name)); }
  void set(std::size_t rank, Expression e);
  void set(std::string_view name, Expression e) { set(chart_->index(name), std::move(e)); }

  bool is_zero() const { return comps_.empty(); }
  Expression apply(const Expression& f) const;

  /// Parity of a homogeneous field; nullopt for zero or mixed fields.
  std::optional<Parity> parity() const;
  /// Common multiweight shift w(X^z) - w(z); nullopt for zero or mixed fields.
  std::optional<Multiweight> weight() const;
  /// Terms of the requested parity.
  VectorField parity_part(Parity p) const;

  VectorField operator-() const;
  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(const Rational& c, const VectorField& X);
  /// (f X)(g) = f * X(g)
  friend VectorField operator*(const Expression& f, const VectorField& X);

  bool equals(const VectorField& o) const;
  friend bool operator==(const VectorField& a, const VectorField& b) { return a.equals(b); }

  /// Keeps only the components whose coordinate has the given kind.
  VectorField restrict_to(CoordKind kind) const;
  VectorField embed(const ChartPtr& target) const;

  std::string str() const;

 private:
  ChartPtr chart_;
  std::map<std::size_t, Expression> comps_;
};

/// Graded commutator [X,Y] = XY - (-1)^{|X||Y|} YX, split by parity parts when
/// the operands are not homogeneous.
VectorField bracket(const VectorField& X, const VectorField& Y);

}  // namespace graded
