#pragma once

#include <map>
#include <string>
#include <vector>

#include "graded/report.hpp"
#include "graded/substitution.hpp"

namespace graded {

/// Change of coordinates between two charts of the same (multi-)graded bundle.
/// `forward` gives each target coordinate in source coordinates, `inverse`
/// each source coordinate in target coordinates. Both are supplied data.
struct TransitionMap {
  std::string name;
  ChartPtr source;
  ChartPtr target;
  Substitution forward;  // from target, to source
  Substitution inverse;  // from source, to target

  /// Unassigned coordinates default to the same-named coordinate.
  static TransitionMap make(std::string name, ChartPtr source, ChartPtr target,
                            const std::map<std::string, Expression>& forward,
                            const std::map<std::string, Expression>& inverse);
  static TransitionMap identity(ChartPtr chart);
  /// Transition whose inverse has not been supplied; inverse() is empty.
  static TransitionMap forward_only(std::string name, ChartPtr source, ChartPtr target,
                                    const std::map<std::string, Expression>& forward);

  bool has_inverse() const { return inverse.from() != nullptr; }

  TransitionMap inverted() const;
};

/// First `a` then `b`: source of a to target of b.
TransitionMap compose(const TransitionMap& a, const TransitionMap& b);

/// Grading preservation, polynomial form and both inverse identities.
Report validate_transition(const TransitionMap& T);

/// Copy of `chart` with extra formal parameters appended.
ChartPtr with_parameters(const ChartPtr& chart, const std::vector<std::string>& names);

/// h_t^* e on the chart extended by the formal parameter `t`. Every coordinate
/// z maps to t^{w_slot(z)} z.
Expression homogeneity_scale(const Expression& e, std::size_t slot, const std::string& t = "t");
/// The substitution z -> t^{w_slot(z)} z on `chart` (which must contain t).
Substitution homogeneity_action(const ChartPtr& chart, std::size_t slot, const std::string& t);

/// h_t o h_s = h_ts per slot and pairwise commutation of the slot actions.
Report check_homogeneity_structure(const ChartPtr& chart);

/// Symbolic form of the regularity condition: for every fiber coordinate,
/// d/dt|_0 h_t^* y must be non-zero, which happens iff the weight is one.
Report regularity_test(const ChartPtr& chart, std::size_t slot = 0);

/// Drops fiber coordinates with weight > l in `slot`.
ChartPtr truncate(const ChartPtr& chart, int l, std::size_t slot = 0);
/// Induced transition on the truncated charts.
TransitionMap truncate(const TransitionMap& T, int l, std::size_t slot = 0);

/// Coordinates of T^k M built over the base chart: a, a_1, ..., a_k.
ChartPtr higher_tangent_chart(const ChartPtr& base, int k, const std::string& name = {});
std::string lifted_name(const std::string& base, int order);

/// Order of a T^k M chart (largest weight).
int tangent_order(const ChartPtr& tk);

/// f^{(alpha)} = D^alpha f with D = sum_a sum_{i<k} a_{i+1} d/da_i.
Expression alpha_lift(const Expression& f, int alpha, const ChartPtr& tk);

/// Lifts a base change (with inverse) to T^k M.
TransitionMap higher_tangent_transition(const TransitionMap& base, int k);

}  // namespace graded
