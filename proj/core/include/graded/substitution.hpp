#pragma once

#include <map>
#include <string>
#include <vector>

#include "graded/expression.hpp"
#include "graded/vector_field.hpp"

namespace graded {

/// Algebra homomorphism from functions on `from` to functions on `to`, fixed by
/// the image of every coordinate of `from`. The reserved eps maps to eps.
class Substitution {
 public:
  Substitution() = default;

  /// Coordinates of `from` absent from `images` map to the same-named
  /// coordinate of `to`; IncompleteMap when there is none. With `check`, every
  /// image must carry its coordinate's parity and multiweight (GradingError).
  static Substitution make(ChartPtr from, ChartPtr to, const std::map<std::string, Expression>& images,
                           bool check = true);
  static Substitution identity(ChartPtr chart);

  const ChartPtr& from() const { return from_; }
  const ChartPtr& to() const { return to_; }
  const Expression& image(std::size_t rank) const { return images_.at(rank); }
  const Expression& image(std::string_view name) const { return images_.at(from_->index(name)); }
  const std::vector<Expression>& images() const { return images_; }

  Expression apply(const Expression& e) const;

  /// One line per coordinate whose image has the wrong parity or multiweight.
  std::vector<std::string> grading_violations() const;

  /// Substitution name -> image over the `to` chart.
  std::map<std::string, Expression> as_map() const;

 private:
  ChartPtr from_;
  ChartPtr to_;
  std::vector<Expression> images_;
};

/// (tau o sigma)(z) = tau(sigma(z)): apply sigma first, then tau.
Substitution compose(const Substitution& sigma, const Substitution& tau);

/// Multiweights compared with the shorter one padded by zeros on the right.
bool same_padded_weight(const Multiweight& a, const Multiweight& b);

/// Rewrites X on `fwd.to()` in the coordinates of `fwd.from()`:
/// component z' is bwd(X(fwd(z'))).
VectorField transport(const VectorField& X, const Substitution& fwd, const Substitution& bwd);

}  // namespace graded
