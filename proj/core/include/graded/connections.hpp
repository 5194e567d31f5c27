#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "graded/algebroids.hpp"
#include "graded/bundles.hpp"

namespace graded {

/// Chart of tau^* Pi A: base coordinates, odd xi of weight (0,...,0,1) and
/// bundle fibers of weight (w,0). Base names of both charts must agree.
ChartPtr product_chart(const ChartPtr& algebroid_chart, const ChartPtr& bundle_chart, const std::string& name = {});

/// Gamma_i^I keyed by (odd name, fiber name), expressions on the product chart.
using ChristoffelData = std::map<std::pair<std::string, std::string>, Expression>;

/// Weighted A-connection: an odd vector field of weight (0,...,0,1) on the
/// product chart that projects to d_A.
class Connection {
 public:
  const Algebroid& algebroid() const { return algebroid_; }
  const ChartPtr& bundle() const { return bundle_; }
  const ChartPtr& product() const { return product_; }
  const VectorField& field() const { return nabla_; }
  const ChristoffelData& christoffels() const { return gamma_; }
  /// Gamma_i^I (zero when absent).
  Expression gamma(const std::string& odd, const std::string& fiber) const;

  /// Ranks on the product chart.
  const std::vector<std::size_t>& odd_ranks() const { return odd_; }
  const std::vector<std::size_t>& fiber_ranks() const { return fibers_; }
  /// The algebroid's d_A, embedded in the product chart.
  const VectorField& base_field() const { return d_; }

 private:
  friend Connection assemble(const Algebroid&, const ChartPtr&, const ChristoffelData&);

  Algebroid algebroid_;
  ChartPtr bundle_;
  ChartPtr product_;
  ChristoffelData gamma_;
  VectorField nabla_;
  VectorField d_;
  std::vector<std::size_t> odd_;
  std::vector<std::size_t> fibers_;
};

/// d_A + xi^i Gamma_i^I d/dy^I after full validation; GradingError on bad
/// Christoffel grades, PreconditionError on an unverified algebroid.
Connection assemble(const Algebroid& A, const ChartPtr& bundle, const ChristoffelData& gamma);
/// The trivial connection d_A extended by zero.
Connection trivial_connection(const Algebroid& A, const ChartPtr& bundle);

/// Every condition of a weighted connection on a candidate field.
Report validate_connection_field(const Algebroid& A, const ChartPtr& bundle, const VectorField& X);
/// Reads Christoffel symbols off a field (DomainError with the report if invalid).
Connection connection_from_field(const Algebroid& A, const ChartPtr& bundle, const VectorField& X);

/// 1/2 [nabla, nabla]
VectorField curvature(const Connection& C);
bool is_flat(const Connection& C);
/// Closed form from Q and Gamma (vertical part; the rest is d_A^2 = 0).
VectorField christoffel_curvature(const Connection& C);
/// The same closed form with the signs of the displayed formula
/// -1/2 xi^i xi^j (Q_j d Gamma_i - Q_i d Gamma_j - Q_ij^k Gamma_k + ...).
VectorField christoffel_curvature_literal(const Connection& C);

/// nabla - nabla' (vertical, odd, weight (0,...,0,1)).
VectorField difference(const Connection& a, const Connection& b);
Connection add_vertical(const Connection& C, const VectorField& V);

// ---- changes of coordinates --------------------------------------------------

/// Transition of product charts assembled from an algebroid frame change and a
/// bundle change of coordinates with matching base parts.
TransitionMap product_transition(const TransitionMap& algebroid_change, const TransitionMap& bundle_change,
                                 const ChartPtr& source_product, const ChartPtr& target_product);
/// Bundle-level transition extended by the identity on the odd coordinates.
TransitionMap lift_to_product(const TransitionMap& bundle_change, const ChartPtr& source_product,
                              const ChartPtr& target_product);

/// Inputs of the transformation law written in unprimed coordinates.
struct FormalChange {
  std::vector<std::string> target_odd;                               // xi^{i'}
  std::map<std::string, Expression> fiber_images;                    // y^{I'} = T^{I'}(x, y)
  std::map<std::pair<std::string, std::string>, Expression> frame_inverse;  // (i', j) -> T_{i'}^j
};

/// Gamma'_{i'}^{I'} = T_{i'}^j (Q_j^a dT^{I'}/dx^a + Gamma_j^J dT^{I'}/dy^J),
/// returned in unprimed coordinates. No inverse is required.
ChristoffelData transform_christoffels_formal(const Connection& C, const FormalChange& change);
/// The checked law: validates the transition, evaluates the formula and
/// rewrites the result on the target product chart.
ChristoffelData transform_christoffels(const Connection& C, const TransitionMap& product_change);
/// Christoffel symbols of nabla rewritten by conjugation with the change.
ChristoffelData conjugated_christoffels(const Connection& C, const TransitionMap& product_change);

// ---- gauge group -------------------------------------------------------------

/// Transition of the product chart onto itself fixing every x and xi.
Report validate_gauge(const ChartPtr& product, const TransitionMap& phi);
/// nabla^phi(z) = phi^*(nabla((phi^{-1})^* z)).
Connection gauge_transform(const Connection& C, const TransitionMap& phi);
/// Gauge element acting as phi first and then psi:
/// gauge_transform(gauge_transform(C, phi), psi) = gauge_transform(C, then(phi, psi)).
TransitionMap then(const TransitionMap& phi, const TransitionMap& psi);

// ---- splittings ---------------------------------------------------------------

/// Linear blocks Gamma_{Ji}^I(x) keyed by (J, i, I); J and I share a weight.
using LinearBlocks = std::map<std::tuple<std::string, std::string, std::string>, Expression>;
ChristoffelData christoffels_from_blocks(const ChartPtr& product, const LinearBlocks& blocks);
/// Rejects any Gamma that is not linear within its own weight block.
Connection split_connection(const Algebroid& A, const ChartPtr& split_bundle, const ChristoffelData& gamma);
/// nabla_phi = phi^* o nabla_split o (phi^{-1})^* on the unsplit bundle `phi.source`.
Connection unsplit_via_splitting(const Connection& split, const TransitionMap& phi);
/// g = psi^{-1} o phi as a gauge element of the unsplit product chart, so that
/// gauge_transform(nabla_psi, g) = nabla_phi.
TransitionMap splitting_gauge(const ChartPtr& product, const ChartPtr& split_product, const TransitionMap& phi,
                              const TransitionMap& psi);

// ---- truncation ---------------------------------------------------------------

Connection project_truncation(const Connection& C, int l);
/// For every l below the degree: validity, flatness inheritance and
/// truncation commuting with curvature.
Report truncation_report(const Connection& C);

// ---- lifts, curvature tensor, quasi-actions -----------------------------------

/// (p_F)_* [nabla, iota_u] on the bundle chart.
VectorField horizontal_lift(const Connection& C, const Section& u);
/// R(u,v) = H([u,v]_A) - [H(u), H(v)]
VectorField curvature_tensor(const Connection& C, const Section& u, const Section& v);
/// -u^i v^j C_ij^I d/dy^I where nabla^2(y^I) = 1/2 xi^i xi^j C_ij^I.
VectorField curvature_contraction(const Connection& C, const Section& u, const Section& v);

/// z -> z + eps H(u)(z) on the bundle chart.
Substitution quasi_action(const Connection& C, const Section& u);
/// Conditions (1)-(3) of a quasi-action for u, v and f; condition (4) is
/// reported separately as `action` and holds exactly for flat nabla.
struct QuasiActionReport {
  Report conditions;
  bool action = false;
  VectorField defect;  // H([u,v]) - [H(u),H(v)]
};
QuasiActionReport check_quasi_action(const Connection& C, const Section& u, const Section& v, const Expression& f);

/// Chart of Pi T F with odd partners d<z> of weight (w,1).
ChartPtr antitangent_bundle_chart(const ChartPtr& bundle, const std::string& name = {});
/// h_nabla as a pullback from Pi T F to tau^* Pi A.
Substitution export_h_morphism(const Connection& C);
/// The commuting square with rho^Pi, checked by substitution.
Report check_h_morphism(const Connection& C);

/// Conditions of a morphism Phi between two connection carriers:
/// equivariance (weight preservation) and nabla o Phi^* = Phi^* o nabla'.
Report check_connection_morphism(const TransitionMap& Phi, const Connection& source, const Connection& target);

}  // namespace graded
