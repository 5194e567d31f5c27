#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "graded/connections.hpp"

namespace graded {

/// Reproducible random instances for property checks. Every method draws from
/// one mt19937_64 stream, so a seed fixes the whole sequence.
class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& engine() { return rng_; }
  int uniform(int lo, int hi);
  bool coin(double p = 0.5);
  /// Nonzero, numerator in [-3, 3], denominator 1 or 2.
  Rational coefficient();

  /// Base chart x1..xn.
  static ChartPtr base_chart(int dim, const std::string& name = "M");
  /// Graded chart over x1..xn with one or two fibers of every weight 1..degree.
  ChartPtr bundle_chart(int dim, int degree, const std::string& name = "F");

  /// Polynomial in the base coordinates of degree <= `degree`.
  Expression base_polynomial(const ChartPtr& chart, int degree);
  /// Homogeneous polynomial of the given weight in the even fibers, base
  /// polynomial coefficients. `min_factors` >= 2 gives purely nonlinear terms.
  /// `avoid` excludes one coordinate.
  Expression fiber_polynomial(const ChartPtr& chart, int weight, int base_degree, int min_factors = 1,
                              const std::string& avoid = {});

  /// Arbitrary structure data (Jacobi usually fails).
  AlgebroidSpec algebroid_spec(int base_dim, int rank, int degree);
  /// Structure data that satisfies the structure equations: tangent, action,
  /// Lie algebra bundle and direct-sum seeds with random rescalings.
  AlgebroidSpec valid_algebroid_spec(int base_dim, int rank);

  Section section(const Algebroid& A, int degree);
  ChristoffelData christoffels(const Algebroid& A, const ChartPtr& bundle, int base_degree);
  Connection connection(const Algebroid& A, const ChartPtr& bundle, int base_degree);
  /// Linear within each weight block.
  Connection split_connection(const Algebroid& A, const ChartPtr& split_bundle, int base_degree);

  /// Composition of `steps` shears c -> c + E and rescalings c -> k c, each
  /// with its exact inverse. `target` must share the layout of `source`.
  TransitionMap triangular_transition(const ChartPtr& source, const ChartPtr& target, int steps, int base_degree,
                                      bool touch_base = true, bool touch_odd = true, bool touch_fibers = true);
  /// Nonlinear shears only; the identity on base and weight-one coordinates.
  TransitionMap splitting(const ChartPtr& unsplit, const ChartPtr& split, int steps, int base_degree);
  /// Gauge element of a product chart: fiber shears only.
  TransitionMap gauge(const ChartPtr& product, int steps, int base_degree);

 private:
  std::mt19937_64 rng_;
};

/// Monomials of total weight w in the even fiber coordinates of a chart,
/// each with at least `min_factors` factors.
std::vector<Expression> fiber_monomials(const ChartPtr& chart, int weight, int min_factors = 1,
                                        const std::string& avoid = {});

}  // namespace graded
