#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "graded/report.hpp"
#include "graded/substitution.hpp"

namespace graded {

/// Input data of a Lie algebroid on a chart of Pi A (base coordinates plus
/// odd weight-one coordinates). Missing entries are zero. Structure
/// components only need one of (i,j)/(j,i); giving both requires Q_ij = -Q_ji.
struct AlgebroidSpec {
  ChartPtr chart;
  std::map<std::pair<std::string, std::string>, Expression> anchor;                        // (xi_i, x^a) -> Q_i^a
  std::map<std::tuple<std::string, std::string, std::string>, Expression> structure;       // (i, j, k) -> Q_ij^k
};

/// Weight-one homological vector field d_A with its structure functions.
class Algebroid {
 public:
  /// Validates and antisymmetrises `spec`; DomainError on inconsistent input.
  static Algebroid make(const AlgebroidSpec& spec);

  const ChartPtr& chart() const { return chart_; }
  std::size_t rank() const { return odd_.size(); }
  std::size_t base_dim() const { return base_.size(); }
  /// Chart ranks of the i-th odd / a-th base coordinate.
  std::size_t odd(std::size_t i) const { return odd_.at(i); }
  std::size_t base(std::size_t a) const { return base_.at(a); }
  const std::vector<std::size_t>& odd_ranks() const { return odd_; }
  const std::vector<std::size_t>& base_ranks() const { return base_; }

  /// Q_i^a and Q_ij^k as base expressions on chart().
  const Expression& anchor(std::size_t i, std::size_t a) const { return anchor_[i][a]; }
  const Expression& structure(std::size_t i, std::size_t j, std::size_t k) const { return structure_[i][j][k]; }

  /// xi^i Q_i^a d/dx^a + 1/2 xi^i xi^j Q_ji^k d/dxi^k
  const VectorField& differential() const { return d_; }

  bool verified() const { return verified_; }
  /// Copy marked as verified; PreconditionError carrying the report otherwise.
  Algebroid verify() const;
  void require_verified(const std::string& what) const;

  AlgebroidSpec spec() const;

 private:
  ChartPtr chart_;
  std::vector<std::size_t> odd_;
  std::vector<std::size_t> base_;
  std::vector<std::vector<Expression>> anchor_;
  std::vector<std::vector<std::vector<Expression>>> structure_;
  VectorField d_;
  bool verified_ = false;
};

/// Chart of Pi A from base coordinate names and odd names (weights 0 and 1).
ChartPtr algebroid_chart(const std::string& name, const std::vector<std::string>& base,
                         const std::vector<std::string>& odd);

VectorField build_differential(const Algebroid& A);

/// Residuals of the two structure equations, computed from Q directly.
struct StructureResiduals {
  // Q_ji^k Q_k^b - (Q_j^a d_a Q_i^b - Q_i^a d_a Q_j^b), indexed (i<j, b)
  std::vector<std::pair<std::string, Expression>> anchor_equation;
  // sum_cyc (Q_i^a d_a Q_jk^l - Q_ij^m Q_mk^l), indexed (i<j<k, l)
  std::vector<std::pair<std::string, Expression>> jacobi_equation;
  // sum_cyc (Q_i^a d_a Q_jk^l + Q_ij^m Q_mk^l), read literally
  std::vector<std::pair<std::string, Expression>> jacobi_literal;
};
StructureResiduals structure_residuals(const Algebroid& A);

/// Structure equations and d_A^2 = 0, each evaluated independently, plus their
/// agreement. The literal reading of the cyclic equation is reported as a
/// diagnostic and does not affect the verdict.
Report check_structure(const Algebroid& A);

/// u = u^i e_i with base-expression components on the algebroid chart.
struct Section {
  std::vector<Expression> u;
};

Section make_section(const Algebroid& A, const std::map<std::string, Expression>& comps);
VectorField iota(const Algebroid& A, const Section& u);
/// Components u^i read back from an odd vertical field sum u^i d/dxi^i.
Section section_from_field(const Algebroid& A, const VectorField& X);

/// iota_{[u,v]} = [[d_A, iota_u], iota_v], cross-checked against the closed
/// form; ConsistencyError if they differ.
Section derived_bracket(const Algebroid& A, const Section& u, const Section& v);
/// u^i Q_i^a dv^k/dx^a - v^i Q_i^a du^k/dx^a - u^i v^j Q_ji^k
Section closed_form_bracket(const Algebroid& A, const Section& u, const Section& v);

/// rho_u(f) = [[d_A, iota_u], f] = u^i Q_i^a df/dx^a; DomainError unless f is a base function.
Expression anchor(const Algebroid& A, const Section& u, const Expression& f);
/// Vector field rho_u on the algebroid chart (only base components).
VectorField anchor_field(const Algebroid& A, const Section& u);

/// Chart of Pi T M: base coordinates and odd "d<name>" partners.
ChartPtr antitangent_chart(const ChartPtr& base_or_algebroid_chart, const std::string& name = {});
std::string differential_name(const std::string& coordinate);
/// rho^Pi as a pullback: x -> x, dx^a -> xi^i Q_i^a (from Pi T M to Pi A).
Substitution anchor_morphism(const Algebroid& A, const ChartPtr& antitangent);
/// d_A o rho^* = rho^* o d on Pi T M.
Report check_anchor_morphism(const Algebroid& A);

/// Tangent algebroid Pi T M with odd coordinates "d<a>": Q_a^b = delta, Q_ab^c = 0.
/// Returned verified.
Algebroid tangent_algebroid(const std::vector<std::string>& base);
/// Lie algebra over the point: constant Q_ij^k = c_ij^k.
Algebroid lie_algebra(const std::vector<std::string>& odd,
                      const std::map<std::tuple<std::string, std::string, std::string>, Rational>& constants);

// ---- Schouten calculus on Pi T* M -----------------------------------------

/// Base coordinates x^a and odd weight-one partners x*_a named "<a>_star".
ChartPtr anticotangent_chart(const std::vector<std::string>& base, const std::string& name = "PiTstarM");
std::string star_name(const std::string& coordinate);

/// [[X,Y]] = (-1)^{|X|+1} dX/dx*_a dY/dx^a - dX/dx^a dY/dx*_a, split by parity.
Expression schouten_bracket(const Expression& X, const Expression& Y);

struct PoissonStructure {
  ChartPtr chart;  // anticotangent chart
  std::map<std::pair<std::string, std::string>, Expression> P;  // (a, b) -> P^{ab}, antisymmetric

  static PoissonStructure make(ChartPtr chart, const std::map<std::pair<std::string, std::string>, Expression>& entries);
  const Expression& entry(std::size_t a, std::size_t b) const;
  /// 1/2 P^{ab} x*_b x*_a
  Expression bivector() const;

 private:
  std::vector<std::vector<Expression>> dense_;
};

Expression schouten_square(const PoissonStructure& P);

struct CotangentAlgebroid {
  Algebroid algebroid;  // Q read off from d_P, verified
  VectorField d_P;      // [[P, -]]
  Report report;
};

/// Lichnerowicz-Poisson differential; PreconditionError with the residual
/// [[P,P]] when Jacobi fails.
CotangentAlgebroid cotangent_algebroid(const PoissonStructure& P);

}  // namespace graded
